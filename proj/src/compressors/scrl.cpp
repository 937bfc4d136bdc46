#include "pct/compressors/scrl.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "pct/compressors/selection.hpp"
#include "pct/core/errors.hpp"

namespace pct {
namespace {

double sigmoid(double z) {
  z = std::clamp(z, -30.0, 30.0);
  return 1.0 / (1.0 + std::exp(-z));
}

// Uniform double in [0, 1) from the top 53 bits; std distributions are not
// guaranteed to be identical across standard libraries.
double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double token_f1(const std::vector<bool>& kept, const std::vector<std::size_t>& reference) {
  std::size_t kept_count = 0;
  for (bool k : kept) kept_count += k ? 1 : 0;
  std::size_t overlap = 0;
  for (std::size_t i : reference) overlap += kept[i] ? 1 : 0;
  if (kept_count == 0 || reference.empty() || overlap == 0) return 0.0;
  const double p = static_cast<double>(overlap) / static_cast<double>(kept_count);
  const double r = static_cast<double>(overlap) / static_cast<double>(reference.size());
  return 2.0 * p * r / (p + r);
}

struct TrainingItem {
  std::vector<ScrlFeatures> features;
  std::vector<std::size_t> reference;
};

double items_ratio_gap(const ScrlPolicy& policy, const std::vector<TrainingItem>& items, double target) {
  double total = 0.0;
  for (const auto& item : items) {
    double keep = 0.0;
    for (const auto& f : item.features) keep += policy.keep_probability(f);
    total += std::abs(1.0 - keep / static_cast<double>(item.features.size()) - target);
  }
  return total / static_cast<double>(items.size());
}

// Golden-section search on the bias weight; keeps the current bias unless the
// search finds a strictly smaller gap.
void calibrate_bias(ScrlPolicy& policy, const std::vector<TrainingItem>& items, double target) {
  constexpr std::size_t kBias = kScrlFeatures - 1;
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto gap_at = [&](double b) {
    ScrlPolicy p = policy;
    p.weights[kBias] = b;
    return items_ratio_gap(p, items, target);
  };
  const double current = policy.weights[kBias];
  double lo = current - 12.0, hi = current + 12.0;
  double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  double g1 = gap_at(x1), g2 = gap_at(x2);
  for (int i = 0; i < 80; ++i) {
    if (g1 <= g2) {
      hi = x2;
      x2 = x1;
      g2 = g1;
      x1 = hi - phi * (hi - lo);
      g1 = gap_at(x1);
    } else {
      lo = x1;
      x1 = x2;
      g1 = g2;
      x2 = lo + phi * (hi - lo);
      g2 = gap_at(x2);
    }
  }
  const double best = g1 <= g2 ? x1 : x2;
  if (gap_at(best) < gap_at(current)) policy.weights[kBias] = best;
}

}  // namespace

ScrlPolicy ScrlPolicy::default_policy() {
  return ScrlPolicy{{0.35, -1.5, -2.0, -0.2, 0.3, 0.8, -1.0}};
}

double ScrlPolicy::keep_probability(const ScrlFeatures& features) const {
  double z = 0.0;
  for (std::size_t i = 0; i < kScrlFeatures; ++i) z += weights[i] * features[i];
  return sigmoid(z);
}

nlohmann::json ScrlPolicy::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t i = 0; i < kScrlFeatures; ++i) j[kFeatureNames[i]] = weights[i];
  return {{"weights", j}};
}

ScrlPolicy ScrlPolicy::from_json(const nlohmann::json& j) {
  ScrlPolicy policy;
  try {
    const auto& w = j.at("weights");
    for (std::size_t i = 0; i < kScrlFeatures; ++i) policy.weights[i] = w.at(kFeatureNames[i]).get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid SCRL policy: ") + e.what());
  }
  return policy;
}

ScrlFeatures scrl_features(const TokenizedText& text, std::size_t index, double self_information) {
  const auto& tok = text[index];
  const double position =
      text.size() > 1 ? static_cast<double>(index) / static_cast<double>(text.size() - 1) : 0.0;
  return {self_information,
          is_stopword(tok) ? 1.0 : 0.0,
          is_punctuation(tok) ? 1.0 : 0.0,
          position,
          static_cast<double>(std::min<std::size_t>(tok.size(), 20)) / 10.0,
          is_capitalized(tok) ? 1.0 : 0.0,
          1.0};
}

std::vector<ScrlFeatures> scrl_feature_matrix(const TokenizedText& text, const Scorer& scorer) {
  std::vector<ScrlFeatures> out;
  if (text.empty()) return out;
  const auto scores = token_logprobs(scorer, text);
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    out.push_back(scrl_features(text, i, scores[i].self_information));
  }
  return out;
}

CompressionResult compress_scrl(const CompressionRequest& request, const ScrlPolicy& policy,
                                const Scorer& scorer) {
  const auto text = tokenize(request.text);
  validate_request(request, text.size());
  if (text.empty()) return extractive_result(text, {}, {});

  std::vector<double> probs;
  probs.reserve(text.size());
  for (const auto& f : scrl_feature_matrix(text, scorer)) probs.push_back(policy.keep_probability(f));

  std::size_t keep = keep_count(request.ratio, text.size());
  if (request.max_length) keep = std::min(keep, static_cast<std::size_t>(*request.max_length));
  std::vector<bool> mask(text.size(), false);
  for (std::size_t i : top_k(probs, keep)) mask[i] = true;
  auto result = extractive_result(text, mask, probs);
  if (keep < keep_count(request.ratio, text.size())) {
    result.notes.push_back("context window max_length=" + std::to_string(*request.max_length) +
                           " bound the keep count");
  }
  return result;
}

ScrlPolicy train_scrl_policy(std::span<const std::string> corpus, const ScrlTrainingConfig& config,
                             const Scorer& scorer) {
  if (corpus.empty()) throw ParameterError("corpus", "SCRL training corpus must not be empty");
  if (config.steps < 1) throw ParameterError("steps", "SCRL training needs at least one step");
  if (!(config.learning_rate >= 0.0)) {
    throw ParameterError("learning_rate", "learning rate must be non-negative");
  }
  if (!(config.target_ratio >= 0.0 && config.target_ratio < 1.0)) {
    throw ParameterError("target_ratio", "target_ratio must lie in [0, 1)");
  }

  std::vector<TrainingItem> items;
  for (const auto& line : corpus) {
    const auto text = tokenize(line);
    if (text.empty()) continue;
    TrainingItem item;
    item.features = scrl_feature_matrix(text, scorer);
    std::vector<double> info;
    for (const auto& f : item.features) info.push_back(f[0]);
    item.reference = top_k(info, keep_count(config.target_ratio, text.size()));
    items.push_back(std::move(item));
  }
  if (items.empty()) throw ParameterError("corpus", "SCRL training corpus contains no tokens");

  const ScrlPolicy start = config.initial.value_or(ScrlPolicy::default_policy());
  ScrlPolicy policy = start;
  std::mt19937_64 rng(config.seed);
  double baseline = 0.0;
  bool have_baseline = false;

  for (int step = 0; step < config.steps; ++step) {
    const auto& item = items[rng() % items.size()];
    const std::size_t n = item.features.size();
    std::vector<bool> kept(n, false);
    std::vector<double> probs(n);
    std::size_t kept_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      probs[i] = policy.keep_probability(item.features[i]);
      kept[i] = unit_uniform(rng) < probs[i];
      kept_count += kept[i] ? 1 : 0;
    }
    const double achieved = 1.0 - static_cast<double>(kept_count) / static_cast<double>(n);
    const double reward = config.alpha * token_f1(kept, item.reference) -
                          config.beta * std::abs(achieved - config.target_ratio);
    if (!have_baseline) {
      baseline = reward;
      have_baseline = true;
    }
    const double advantage = reward - baseline;
    baseline = 0.9 * baseline + 0.1 * reward;

    // d/dw log Bernoulli(a | sigma(w.phi)) = (a - p) phi
    ScrlFeatures grad{};
    for (std::size_t i = 0; i < n; ++i) {
      const double coeff = (kept[i] ? 1.0 : 0.0) - probs[i];
      for (std::size_t f = 0; f < kScrlFeatures; ++f) grad[f] += coeff * item.features[i][f];
    }
    const double scale = config.learning_rate * advantage / static_cast<double>(n);
    for (std::size_t f = 0; f < kScrlFeatures; ++f) policy.weights[f] += scale * grad[f];
  }
  if (config.learning_rate == 0.0) return policy;

  calibrate_bias(policy, items, config.target_ratio);
  if (items_ratio_gap(policy, items, config.target_ratio) > items_ratio_gap(start, items, config.target_ratio)) {
    policy = start;
    calibrate_bias(policy, items, config.target_ratio);
  }
  return policy;
}

double mean_ratio_gap(const ScrlPolicy& policy, std::span<const std::string> corpus,
                      double target_ratio, const Scorer& scorer) {
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& line : corpus) {
    const auto text = tokenize(line);
    if (text.empty()) continue;
    double keep = 0.0;
    for (const auto& f : scrl_feature_matrix(text, scorer)) keep += policy.keep_probability(f);
    const double expected_ratio = 1.0 - keep / static_cast<double>(text.size());
    total += std::abs(expected_ratio - target_ratio);
    ++count;
  }
  return count == 0 ? 0.0 : total / static_cast<double>(count);
}

}  // namespace pct
