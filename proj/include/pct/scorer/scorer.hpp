#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pct/core/tokenizer.hpp"

namespace pct {

struct TokenScore {
  std::string token;
  double logprob = 0.0;           // natural log, <= 0
  double self_information = 0.0;  // bits, >= 0
};

double self_information_bits(double logprob);

// A language-model scoring backend. Every implementation honors the same
// contract, so compressors never know which one they are talking to.
class Scorer {
 public:
  virtual ~Scorer() = default;

  // ln p(tokens[i] | history, tokens[0..i)) for every i.
  virtual std::vector<double> logprobs(std::span<const std::string> tokens,
                                       std::span<const std::string> history) const = 0;

  // ln p(tokens[i] | condition, tokens[0..i)). The default treats the
  // condition as plain history.
  virtual std::vector<double> conditional_logprobs(std::span<const std::string> tokens,
                                                   std::span<const std::string> condition) const {
    return logprobs(tokens, condition);
  }

  // exp of the mean negative log-likelihood of tokens given condition.
  virtual double sequence_perplexity(std::span<const std::string> tokens,
                                     std::span<const std::string> condition) const;

  virtual std::string describe() const = 0;
};

// One score per token, each conditioned on the full preceding prefix (as far as
// the backend can see). Throws ParameterError on empty text.
std::vector<TokenScore> token_logprobs(const Scorer& scorer, const TokenizedText& text);

std::vector<TokenScore> to_token_scores(std::span<const std::string> tokens,
                                        std::span<const double> logprobs);

// exp of the mean negative log-likelihood per token. With a condition, every
// token is scored with the condition prepended to its context.
double perplexity(const Scorer& scorer, const TokenizedText& text,
                  const std::optional<std::string>& condition = std::nullopt);
double perplexity(const Scorer& scorer, std::span<const std::string> tokens,
                  std::span<const std::string> condition = {});

}  // namespace pct
