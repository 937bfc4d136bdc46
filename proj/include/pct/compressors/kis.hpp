#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pct/core/compression.hpp"
#include "pct/core/tokenizer.hpp"
#include "pct/net/transport.hpp"
#include "pct/scorer/scorer.hpp"

namespace pct {

struct GenerationRequest {
  std::string source;
  std::size_t target_tokens = 0;
  int n = 4;
  double temperature = 0.7;
  std::optional<std::uint64_t> seed;
};

// Produces candidate rewrites of a text.
class Generator {
 public:
  virtual ~Generator() = default;
  virtual std::vector<std::string> generate(const GenerationRequest& request) const = 0;
  virtual std::string describe() const = 0;
};

// OpenAI-compatible chat/completions client asking for n rewrites at once.
class ChatGenerator final : public Generator {
 public:
  explicit ChatGenerator(net::EndpointConfig config);
  ChatGenerator(net::EndpointConfig config, std::shared_ptr<const net::Transport> transport);

  std::vector<std::string> generate(const GenerationRequest& request) const override;
  std::string describe() const override;
  nlohmann::json request_body(const GenerationRequest& request) const;

 private:
  net::EndpointClient client_;
};

struct KisReward {
  double fluency = 0.0;     // 1 / perplexity under the scorer, in (0, 1]
  double salience = 0.0;    // share of source keywords present in the candidate
  double simplicity = 0.0;  // 1 - |candidate ratio - requested ratio|
  double combined = 0.0;
};

// The top 20% of source tokens by self-information (ties to earlier tokens),
// lower-cased.
std::vector<std::string> salient_keywords(const TokenizedText& source,
                                          std::span<const double> self_info);

KisReward kis_reward(const TokenizedText& candidate, std::size_t original_len,
                     std::span<const std::string> keywords, double ratio, const Scorer& scorer,
                     const CompressorOptions& options);

// Generate-and-rerank: asks the generator for candidates at the target length
// and returns the one with the highest combined reward (ties to the earlier
// candidate). Candidates that are empty or longer than the source are
// unusable; no usable candidate is an UpstreamError.
CompressionResult compress_kis(const CompressionRequest& request, const Generator& generator,
                               const Scorer& scorer);

}  // namespace pct
