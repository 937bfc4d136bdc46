#pragma once

#include <memory>

#include "pct/metrics/metrics.hpp"
#include "pct/net/transport.hpp"

namespace pct::metrics {

// OpenAI-compatible embeddings client: POST /embeddings {model, input: [...]}.
class RemoteEmbedder final : public Embedder {
 public:
  explicit RemoteEmbedder(net::EndpointConfig config);
  RemoteEmbedder(net::EndpointConfig config, std::shared_ptr<const net::Transport> transport);

  std::vector<std::vector<double>> embed(std::span<const std::string> texts) const override;

 private:
  net::EndpointClient client_;
};

}  // namespace pct::metrics
