#include "pct/runner/llm.hpp"

#include "pct/core/errors.hpp"

namespace pct::runner {

RemoteLlm::RemoteLlm(net::EndpointConfig config, LlmMode mode)
    : RemoteLlm(config, mode, net::make_transport(config)) {}

RemoteLlm::RemoteLlm(net::EndpointConfig config, LlmMode mode, std::shared_ptr<const net::Transport> transport)
    : client_(std::move(config), std::move(transport)), mode_(mode) {}

nlohmann::json RemoteLlm::request_body(const ChatPrompt& prompt) const {
  if (mode_ == LlmMode::Completion) {
    return {{"model", client_.config().model},
            {"prompt", prompt.system.empty() ? prompt.user : prompt.system + "\n\n" + prompt.user},
            {"temperature", 0},
            {"max_tokens", 1024}};
  }
  auto messages = nlohmann::json::array();
  if (!prompt.system.empty()) messages.push_back({{"role", "system"}, {"content", prompt.system}});
  messages.push_back({{"role", "user"}, {"content", prompt.user}});
  return {{"model", client_.config().model}, {"messages", messages}, {"temperature", 0}};
}

LlmReply RemoteLlm::complete(const ChatPrompt& prompt) const {
  const bool chat = mode_ == LlmMode::Chat;
  const auto reply = client_.post_json(chat ? "/chat/completions" : "/completions", request_body(prompt));
  try {
    const auto& choice = reply.body.at("choices").at(0);
    const auto& text = chat ? choice.at("message").at("content") : choice.at("text");
    return {text.is_null() ? std::string{} : text.get<std::string>(), reply.latency_ms};
  } catch (const nlohmann::json::exception& e) {
    throw UpstreamError(200, "target LLM returned an unusable payload: " + std::string(e.what()));
  }
}

}  // namespace pct::runner
