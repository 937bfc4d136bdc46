#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "pct/scorer/scorer.hpp"

namespace pct {

// Add-k smoothed n-gram model of order 1..3 over toolkit tokens.
//
//   p(t | c) = (count(c, t) + k) / (total(c) + k * |V|)
//
// V is every corpus token plus kUnknown; contexts are padded with kBegin, which
// is never predicted. Unseen contexts fall back to the uniform distribution.
//
// Conditional scoring treats the condition as history and additionally mixes
// in a cache distribution over the condition's tokens:
//
//   p'(t | c, q) = (1 - w) p(t | c) + w * count_q(t) / |q|
//
// so tokens shared with the condition become more likely even for a unigram
// model, where history alone changes nothing.
class NgramModel final : public Scorer {
 public:
  static constexpr const char* kUnknown = "<unk>";
  static constexpr const char* kBegin = "<s>";

  static NgramModel fit(std::span<const std::string> corpus, int order, double smoothing_k,
                        double cache_weight = 0.2);

  // Every token of vocab (plus kUnknown) gets the same probability.
  static NgramModel uniform(std::span<const std::string> vocab);

  std::vector<double> logprobs(std::span<const std::string> tokens,
                               std::span<const std::string> history) const override;
  std::vector<double> conditional_logprobs(std::span<const std::string> tokens,
                                           std::span<const std::string> condition) const override;
  // Computed from the exact count ratios, so a uniform model gives |V|
  // exactly.
  double sequence_perplexity(std::span<const std::string> tokens,
                             std::span<const std::string> condition) const override;
  std::string describe() const override;

  // context holds the preceding tokens, most recent last; only the last
  // order - 1 are used and missing ones are padded with kBegin.
  double probability(std::span<const std::string> context, const std::string& token) const;

  int order() const noexcept { return order_; }
  double smoothing_k() const noexcept { return smoothing_k_; }
  double cache_weight() const noexcept { return cache_weight_; }
  const std::vector<std::string>& vocab() const noexcept { return vocab_; }
  bool in_vocab(const std::string& token) const { return vocab_index_.contains(token); }

  // Every context seen during fitting, as token tuples of length order - 1.
  std::vector<std::vector<std::string>> observed_contexts() const;

 private:
  struct ContextCounts {
    std::size_t total = 0;
    std::unordered_map<std::string, std::size_t> counts;
  };

  NgramModel() = default;

  const std::string& canonical(const std::string& token) const;
  std::string context_key(std::span<const std::string> history,
                          std::span<const std::string> tokens, std::size_t position) const;
  // p as (numerator, denominator).
  std::pair<double, double> ratio_for_key(const std::string& key, const std::string& token) const;
  double probability_for_key(const std::string& key, const std::string& token) const;

  int order_ = 1;
  double smoothing_k_ = 1.0;
  double cache_weight_ = 0.2;
  std::vector<std::string> vocab_;
  std::unordered_set<std::string> vocab_index_;
  std::unordered_map<std::string, ContextCounts> contexts_;
};

}  // namespace pct
