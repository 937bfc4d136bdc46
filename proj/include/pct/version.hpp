#pragma once

namespace pct {

inline constexpr const char* kToolkitVersion = "1.0.0";

}  // namespace pct
