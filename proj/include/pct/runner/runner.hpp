#pragma once

#include <memory>
#include <optional>
#include <string>

#include "pct/compressors/toolkit.hpp"
#include "pct/datasets/registry.hpp"
#include "pct/metrics/metrics.hpp"
#include "pct/runner/config.hpp"
#include "pct/runner/llm.hpp"
#include "pct/runner/report.hpp"

namespace pct::runner {

// Everything a run talks to. Tests build one by hand with mock backends.
struct RunEnvironment {
  datasets::Registry registry;
  Backends backends;
  std::shared_ptr<const LlmClient> llm;  // EchoLlm when the run has no target LLM
  std::shared_ptr<const metrics::Embedder> embedder;
};

// Loads the registry, fits or connects the scorer, loads the SCRL policy and
// wires remote endpoints (with their cassettes). Throws ConfigError.
RunEnvironment build_environment(const RunConfig& config);

// Fits the n-gram scorer of a run: the configured corpus files (the bundled
// English corpus when none are given) plus, optionally, the dataset sources.
std::shared_ptr<const Scorer> fit_scorer(const ScorerConfig& config, const std::filesystem::path& data_root,
                                         const std::vector<datasets::DatasetRecord>& records);

// One metric of a hypothesis against a reference. "rouge" expands to rouge_1,
// rouge_2 and rouge_l; edit_distance is the character Levenshtein distance.
// Skipped values (bertscore without an embedder) are returned with skipped set.
std::vector<metrics::MetricValue> score_text(const std::string& metric, const std::string& hypothesis,
                                             const std::string& reference, const metrics::Embedder* embedder);

// Runs every ratio of the config over the dataset. Rows that fail (compressor
// parameter errors, endpoint failures, timeouts) become itemized skips.
// Throws ConfigError for invalid pairings and UpstreamError when a mandatory
// endpoint fails its preflight probe.
EvalReport run_eval(const RunConfig& config, const RunEnvironment& env);
EvalReport run_eval(const RunConfig& config);

}  // namespace pct::runner
