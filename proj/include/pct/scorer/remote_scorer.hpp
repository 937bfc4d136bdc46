#pragma once

#include <memory>

#include "pct/net/transport.hpp"
#include "pct/scorer/scorer.hpp"

namespace pct {

// Scores tokens through an OpenAI-compatible completions endpoint with
// echo=true, so the model returns logprobs for the prompt itself. Subword
// logprobs are summed onto the toolkit token whose span contains the first
// non-space byte of the subword; a toolkit token covered by no subword start
// (it shares a subword with its left neighbor) gets logprob 0.
class RemoteScorer final : public Scorer {
 public:
  explicit RemoteScorer(net::EndpointConfig config);
  RemoteScorer(net::EndpointConfig config, std::shared_ptr<const net::Transport> transport);

  std::vector<double> logprobs(std::span<const std::string> tokens,
                               std::span<const std::string> history) const override;
  std::string describe() const override;

  // Request body sent for one prompt.
  nlohmann::json request_body(const std::string& prompt) const;

 private:
  net::EndpointClient client_;
};

}  // namespace pct
