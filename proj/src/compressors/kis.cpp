#include "pct/compressors/kis.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "pct/compressors/selection.hpp"
#include "pct/core/errors.hpp"

namespace pct {

ChatGenerator::ChatGenerator(net::EndpointConfig config)
    : ChatGenerator(config, net::make_transport(config)) {}

ChatGenerator::ChatGenerator(net::EndpointConfig config, std::shared_ptr<const net::Transport> transport)
    : client_(std::move(config), std::move(transport)) {}

std::string ChatGenerator::describe() const {
  return "chat(" + client_.config().base_url + ", model=" + client_.config().model + ")";
}

nlohmann::json ChatGenerator::request_body(const GenerationRequest& request) const {
  const std::string instruction =
      "Rewrite the user's text as a simpler, shorter version of about " +
      std::to_string(request.target_tokens) +
      " words. Keep the key facts and names. Reply with the rewritten text only.";
  nlohmann::json body = {
      {"model", client_.config().model},
      {"messages", nlohmann::json::array({{{"role", "system"}, {"content", instruction}},
                                          {{"role", "user"}, {"content", request.source}}})},
      {"n", request.n},
      {"temperature", request.temperature}};
  if (request.seed) body["seed"] = *request.seed;
  return body;
}

std::vector<std::string> ChatGenerator::generate(const GenerationRequest& request) const {
  const auto reply = client_.post_json("/chat/completions", request_body(request));
  std::vector<std::string> out;
  try {
    for (const auto& choice : reply.body.at("choices")) {
      const auto& content = choice.at("message").at("content");
      if (content.is_string()) out.push_back(content.get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw UpstreamError(200, "endpoint " + client_.config().base_url +
                                 "/chat/completions returned an unusable payload: " + e.what());
  }
  return out;
}

std::vector<std::string> salient_keywords(const TokenizedText& source, std::span<const double> self_info) {
  std::vector<std::string> keywords;
  if (source.empty()) return keywords;
  for (std::size_t i : top_k(self_info, keep_count(0.8, source.size()))) {
    keywords.push_back(to_lower(source[i]));
  }
  return keywords;
}

KisReward kis_reward(const TokenizedText& candidate, std::size_t original_len,
                     std::span<const std::string> keywords, double ratio, const Scorer& scorer,
                     const CompressorOptions& options) {
  KisReward reward;
  reward.fluency = 1.0 / perplexity(scorer, candidate.tokens());

  std::unordered_set<std::string> present;
  for (const auto& tok : candidate.tokens()) present.insert(to_lower(tok));
  std::size_t hits = 0;
  for (const auto& k : keywords) hits += present.contains(k) ? 1 : 0;
  reward.salience = keywords.empty() ? 1.0 : static_cast<double>(hits) / static_cast<double>(keywords.size());

  const double candidate_ratio = std::clamp(
      1.0 - static_cast<double>(candidate.size()) / static_cast<double>(original_len), 0.0, 1.0);
  reward.simplicity = 1.0 - std::abs(candidate_ratio - ratio);

  reward.combined = options.fluency_weight * reward.fluency + options.salience_weight * reward.salience +
                    options.simplicity_weight * reward.simplicity;
  return reward;
}

CompressionResult compress_kis(const CompressionRequest& request, const Generator& generator,
                               const Scorer& scorer) {
  const auto source = tokenize(request.text);
  validate_request(request, source.size());
  if (source.empty()) return extractive_result(source, {}, {});

  const auto scores = token_logprobs(scorer, source);
  std::vector<double> info;
  for (const auto& s : scores) info.push_back(s.self_information);
  const auto keywords = salient_keywords(source, info);

  GenerationRequest gen;
  gen.source = request.text;
  gen.target_tokens = keep_count(request.ratio, source.size());
  gen.n = request.options.candidates;
  gen.temperature = request.options.temperature;
  gen.seed = request.seed;
  const auto candidates = generator.generate(gen);

  std::optional<std::size_t> best;
  double best_reward = 0.0;
  std::vector<TokenizedText> tokenized;
  std::size_t unusable = 0;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    tokenized.push_back(tokenize(candidates[c]));
    const auto& cand = tokenized.back();
    if (cand.empty() || cand.size() > source.size()) {
      ++unusable;
      continue;
    }
    const auto reward = kis_reward(cand, source.size(), keywords, request.ratio, scorer, request.options);
    if (!best || reward.combined > best_reward) {
      best = c;
      best_reward = reward.combined;
    }
  }
  if (!best) {
    throw UpstreamError(502, "KiS generator returned no usable candidate (" +
                                 std::to_string(candidates.size()) + " received, " +
                                 std::to_string(unusable) + " empty or longer than the source)");
  }

  const auto& chosen = tokenized[*best];
  CompressionResult result;
  result.compressed = chosen.render_all();
  result.original_len = source.size();
  result.compressed_len = chosen.size();
  result.achieved_ratio = compute_ratio(source.size(), chosen.size());
  const auto chosen_scores = token_logprobs(scorer, chosen);
  for (const auto& s : chosen_scores) result.trace.push_back({s.token, s.self_information, true});
  result.notes.push_back("candidate " + std::to_string(*best) + " of " + std::to_string(candidates.size()) +
                         " selected, reward " + std::to_string(best_reward));
  return result;
}

}  // namespace pct
