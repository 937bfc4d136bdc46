#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "pct/compressors/kis.hpp"
#include "pct/compressors/lingua.hpp"
#include "pct/compressors/scrl.hpp"
#include "pct/compressors/selective_context.hpp"
#include "pct/scorer/scorer.hpp"

namespace pct {

// Everything a compressor may need. Immutable once built; share freely.
struct Backends {
  std::shared_ptr<const Scorer> scorer;
  std::shared_ptr<const Generator> generator;  // only KiS needs one
  ScrlPolicy scrl_policy = ScrlPolicy::default_policy();
};

// The single entry point: dispatches on request.compressor. Throws
// ParameterError for invalid requests, ConfigError when a required backend is
// missing, UpstreamError when a remote backend fails.
CompressionResult compress(const CompressionRequest& request, const Backends& backends);

struct CompressorInfo {
  CompressorKind kind;
  bool available = true;
  std::string reason;
  nlohmann::json parameters;  // parameter schema
};

std::vector<CompressorInfo> describe_compressors(const Backends& backends);

// Reads the optional per-request knobs ({"granularity": "token", ...}).
// Unknown keys are rejected.
CompressorOptions options_from_json(const nlohmann::json& params);

}  // namespace pct
