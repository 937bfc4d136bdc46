#pragma once

#include <memory>
#include <string>

#include "pct/net/transport.hpp"

namespace pct::runner {

struct ChatPrompt {
  std::string system;
  std::string user;
};

struct LlmReply {
  std::string text;
  double latency_ms = 0.0;
};

// The frozen target LLM that reconstructs, summarizes or answers.
class LlmClient {
 public:
  virtual ~LlmClient() = default;
  virtual LlmReply complete(const ChatPrompt& prompt) const = 0;
  virtual void probe() const {}
};

enum class LlmMode { Chat, Completion };

// OpenAI-compatible client at temperature 0. Chat mode posts
// /chat/completions with system and user messages; completion mode posts
// /completions with the two parts joined by a blank line.
class RemoteLlm final : public LlmClient {
 public:
  RemoteLlm(net::EndpointConfig config, LlmMode mode = LlmMode::Chat);
  RemoteLlm(net::EndpointConfig config, LlmMode mode, std::shared_ptr<const net::Transport> transport);

  LlmReply complete(const ChatPrompt& prompt) const override;
  void probe() const override { client_.probe(); }
  nlohmann::json request_body(const ChatPrompt& prompt) const;

 private:
  net::EndpointClient client_;
  LlmMode mode_;
};

// Returns the user message unchanged.
class EchoLlm final : public LlmClient {
 public:
  LlmReply complete(const ChatPrompt& prompt) const override { return {prompt.user, 0.0}; }
};

}  // namespace pct::runner
