#include "pct/scorer/remote_scorer.hpp"

#include "pct/core/errors.hpp"

namespace pct {

RemoteScorer::RemoteScorer(net::EndpointConfig config)
    : RemoteScorer(config, net::make_transport(config)) {}

RemoteScorer::RemoteScorer(net::EndpointConfig config, std::shared_ptr<const net::Transport> transport)
    : client_(std::move(config), std::move(transport)) {}

nlohmann::json RemoteScorer::request_body(const std::string& prompt) const {
  return {{"model", client_.config().model},
          {"prompt", prompt},
          {"max_tokens", 0},
          {"logprobs", true},
          {"echo", true}};
}

std::string RemoteScorer::describe() const {
  return "remote(" + client_.config().base_url + ", model=" + client_.config().model + ")";
}

std::vector<double> RemoteScorer::logprobs(std::span<const std::string> tokens,
                                           std::span<const std::string> history) const {
  if (tokens.empty()) return {};
  std::string prompt;
  for (const auto& tok : history) {
    if (!prompt.empty()) prompt += ' ';
    prompt += tok;
  }
  std::vector<Span> spans;
  spans.reserve(tokens.size());
  for (const auto& tok : tokens) {
    if (!prompt.empty()) prompt += ' ';
    spans.push_back({prompt.size(), prompt.size() + tok.size()});
    prompt += tok;
  }

  const auto reply = client_.post_json("/completions", request_body(prompt));
  const auto fail = [&](const std::string& why) {
    return UpstreamError(200, "endpoint " + client_.config().base_url +
                                  "/completions returned an unusable logprob payload: " + why);
  };

  std::vector<double> out(tokens.size(), 0.0);
  try {
    const auto& lp = reply.body.at("choices").at(0).at("logprobs");
    const auto& sub_tokens = lp.at("tokens");
    const auto& sub_logprobs = lp.at("token_logprobs");
    if (sub_tokens.size() != sub_logprobs.size()) throw fail("tokens and token_logprobs differ in length");
    std::vector<std::size_t> sub_offsets;
    if (lp.contains("text_offset") && !lp["text_offset"].is_null()) {
      sub_offsets = lp["text_offset"].get<std::vector<std::size_t>>();
      if (sub_offsets.size() != sub_tokens.size()) throw fail("text_offset length mismatch");
    } else {
      std::size_t pos = 0;
      for (const auto& t : sub_tokens) {
        sub_offsets.push_back(pos);
        pos += t.get<std::string>().size();
      }
    }

    std::size_t cursor = 0;
    for (std::size_t k = 0; k < sub_tokens.size(); ++k) {
      const auto text = sub_tokens[k].get<std::string>();
      std::size_t lead = 0;
      while (lead < text.size() && (text[lead] == ' ' || text[lead] == '\n' || text[lead] == '\t')) ++lead;
      if (lead == text.size()) continue;
      const std::size_t at = sub_offsets[k] + lead;
      while (cursor < spans.size() && spans[cursor].end <= at) ++cursor;
      if (cursor == spans.size()) break;
      if (at < spans[cursor].start) continue;  // inside the history part
      if (!sub_logprobs[k].is_null()) out[cursor] += sub_logprobs[k].get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw fail(e.what());
  }
  for (double& v : out) v = v < 0.0 ? v : 0.0;
  return out;
}

}  // namespace pct
