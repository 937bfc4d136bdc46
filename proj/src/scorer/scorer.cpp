#include "pct/scorer/scorer.hpp"

#include <cmath>
#include <numbers>

#include "pct/core/errors.hpp"

namespace pct {

double self_information_bits(double logprob) {
  const double bits = -logprob / std::numbers::ln2;
  return bits > 0.0 ? bits : 0.0;
}

std::vector<TokenScore> to_token_scores(std::span<const std::string> tokens,
                                        std::span<const double> logprobs) {
  std::vector<TokenScore> scores;
  scores.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const double lp = logprobs[i] < 0.0 ? logprobs[i] : 0.0;
    scores.push_back({tokens[i], lp, self_information_bits(lp)});
  }
  return scores;
}

std::vector<TokenScore> token_logprobs(const Scorer& scorer, const TokenizedText& text) {
  if (text.empty()) throw ParameterError("text", "cannot score an empty text");
  const auto lps = scorer.logprobs(text.tokens(), {});
  return to_token_scores(text.tokens(), lps);
}

double perplexity(const Scorer& scorer, std::span<const std::string> tokens,
                  std::span<const std::string> condition) {
  if (tokens.empty()) throw ParameterError("text", "perplexity of an empty text is undefined");
  return scorer.sequence_perplexity(tokens, condition);
}

double Scorer::sequence_perplexity(std::span<const std::string> tokens,
                                   std::span<const std::string> condition) const {
  const auto lps = condition.empty() ? logprobs(tokens, {}) : conditional_logprobs(tokens, condition);
  double nll = 0.0;
  for (double lp : lps) nll -= lp;
  return std::exp(nll / static_cast<double>(lps.size()));
}

double perplexity(const Scorer& scorer, const TokenizedText& text,
                  const std::optional<std::string>& condition) {
  if (!condition) return perplexity(scorer, text.tokens());
  const auto cond = tokenize(*condition);
  return perplexity(scorer, text.tokens(), cond.tokens());
}

}  // namespace pct
