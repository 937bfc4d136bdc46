#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "pct/core/compression.hpp"
#include "pct/core/tokenizer.hpp"
#include "pct/scorer/scorer.hpp"

namespace pct {

inline constexpr std::size_t kScrlFeatures = 7;
using ScrlFeatures = std::array<double, kScrlFeatures>;

// Linear token-deletion policy: keep-probability sigma(w . phi(token)).
struct ScrlPolicy {
  static constexpr std::array<const char*, kScrlFeatures> kFeatureNames = {
      "self_information", "is_stopword", "is_punctuation", "relative_position",
      "token_length",     "is_capitalized", "bias"};

  ScrlFeatures weights{};

  // Hand-set prior used before any training: favors informative, capitalized
  // content words over stopwords and punctuation.
  static ScrlPolicy default_policy();

  double keep_probability(const ScrlFeatures& features) const;

  nlohmann::json to_json() const;
  static ScrlPolicy from_json(const nlohmann::json& j);

  friend bool operator==(const ScrlPolicy&, const ScrlPolicy&) = default;
};

// phi(token): self-information (bits), stopword and punctuation indicators,
// position in [0, 1], min(length, 20) / 10, capitalization, constant 1.
ScrlFeatures scrl_features(const TokenizedText& text, std::size_t index, double self_information);

std::vector<ScrlFeatures> scrl_feature_matrix(const TokenizedText& text, const Scorer& scorer);

// Deterministic inference: keeps the top-k tokens by keep-probability with
// k = min(keep_count(ratio), max_length). Trace scores are keep-probabilities.
CompressionResult compress_scrl(const CompressionRequest& request, const ScrlPolicy& policy,
                                const Scorer& scorer);

struct ScrlTrainingConfig {
  int steps = 200;
  double learning_rate = 0.05;
  double target_ratio = 0.5;
  std::uint64_t seed = 0;
  double alpha = 1.0;  // weight of the token-F1 term
  double beta = 1.0;   // weight of the ratio penalty
  std::optional<ScrlPolicy> initial;
};

// REINFORCE over per-token Bernoulli keep decisions. Each step samples one
// corpus item, draws keep decisions from the policy and rewards
//   alpha * F1(kept, top self-information tokens) - beta * |achieved - target|
// against a moving-average baseline. The bias weight is then tuned so the
// mean expected-ratio gap over the corpus is no larger than the starting
// policy's; if the trained weights cannot get there, the starting weights are
// kept with a tuned bias. A zero learning rate returns the starting policy.
// Identical inputs give bitwise identical weights.
ScrlPolicy train_scrl_policy(std::span<const std::string> corpus, const ScrlTrainingConfig& config,
                             const Scorer& scorer);

// Mean |expected ratio - target| over the corpus, where the expected ratio of
// an item is 1 - mean keep-probability of its tokens under the stochastic policy.
double mean_ratio_gap(const ScrlPolicy& policy, std::span<const std::string> corpus,
                      double target_ratio, const Scorer& scorer);

}  // namespace pct
