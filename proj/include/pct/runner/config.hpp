#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pct/core/compression.hpp"
#include "pct/net/transport.hpp"
#include "pct/runner/llm.hpp"

namespace pct::runner {

enum class Mode { IntrinsicReconstruction, IntrinsicSummarization, ExtrinsicAnswer };

std::string_view to_string(Mode mode);
std::optional<Mode> parse_mode(std::string_view name);

struct ScorerConfig {
  std::string type = "ngram";  // "ngram" or "remote"
  int order = 2;
  double smoothing_k = 0.1;
  double cache_weight = 0.2;
  std::vector<std::filesystem::path> corpus;  // defaults to the bundled corpus
  bool include_dataset = true;                // also fit on the dataset's sources
  std::optional<net::EndpointConfig> remote;
};

struct RunConfig {
  std::string name;
  CompressorKind compressor = CompressorKind::SelectiveContext;
  CompressorOptions options;
  std::optional<std::int64_t> max_length;
  std::string dataset;
  std::vector<std::string> metrics;
  std::vector<double> ratios{0.5};
  Mode mode = Mode::IntrinsicReconstruction;
  std::optional<net::EndpointConfig> target_llm;
  LlmMode llm_mode = LlmMode::Chat;
  std::optional<net::EndpointConfig> generator;
  std::optional<net::EndpointConfig> embedder;
  ScorerConfig scorer;
  std::optional<std::filesystem::path> scrl_policy;
  std::optional<std::filesystem::path> registry;  // bundled registry when unset
  std::uint64_t seed = 0;
  int concurrency = 1;
  int row_timeout_ms = 120000;
  std::optional<std::size_t> limit;  // evaluate only the first rows

  // Echo of the configuration for reports; never contains secrets.
  nlohmann::json to_json() const;
};

// Reads a scorer block. Throws ConfigError.
ScorerConfig scorer_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);

// Reads the endpoint block j[key] when present; a relative cassette path
// resolves against base_dir.
std::optional<net::EndpointConfig> endpoint_from(const nlohmann::json& j, const char* key,
                                                 const std::filesystem::path& base_dir);

// Reads one run. Relative paths resolve against base_dir. Throws ConfigError.
RunConfig run_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);

// An eval file is either a single run object or
//   {"defaults": {...}, "runs": [{...}, ...]}
// where every run is merged over the defaults.
std::vector<RunConfig> load_eval_file(const std::filesystem::path& file);

// PCT_LLM_BASE_URL, PCT_GENERATOR_BASE_URL, PCT_EMBEDDER_BASE_URL and
// PCT_SCORER_BASE_URL replace endpoint URLs; PCT_API_KEY_ENV replaces the
// name of the key variable on every endpoint; PCT_CASSETTE_MODE sets the mode
// of every endpoint that names a cassette.
void apply_env_overrides(RunConfig& config);

// Structural checks that need no dataset access: mode/metric pairing,
// extrinsic runs have a target LLM, ratios in range, KiS has a generator.
void validate(const RunConfig& config);

}  // namespace pct::runner
