#include "pct/scorer/ngram.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pct/core/errors.hpp"

namespace pct {
namespace {

constexpr char kSep = '\x1f';

std::vector<std::string> split_key(const std::string& key, int width) {
  std::vector<std::string> parts;
  if (width == 0) return parts;
  std::string current;
  for (char c : key) {
    if (c == kSep) {
      parts.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  parts.push_back(std::move(current));
  return parts;
}

}  // namespace

NgramModel NgramModel::fit(std::span<const std::string> corpus, int order, double smoothing_k,
                           double cache_weight) {
  if (corpus.empty()) throw ParameterError("corpus", "n-gram corpus must not be empty");
  if (order < 1 || order > 3) throw ParameterError("order", "n-gram order must be 1, 2 or 3");
  if (!(smoothing_k > 0.0)) throw ParameterError("smoothing_k", "smoothing_k must be positive");
  if (!(cache_weight >= 0.0 && cache_weight < 1.0)) {
    throw ParameterError("cache_weight", "cache_weight must lie in [0, 1)");
  }

  NgramModel model;
  model.order_ = order;
  model.smoothing_k_ = smoothing_k;
  model.cache_weight_ = cache_weight;

  std::vector<TokenizedText> texts;
  texts.reserve(corpus.size());
  for (const auto& line : corpus) {
    texts.push_back(tokenize(line));
    for (const auto& tok : texts.back().tokens()) {
      if (model.vocab_index_.insert(tok).second) model.vocab_.push_back(tok);
    }
  }
  if (model.vocab_.empty()) throw ParameterError("corpus", "n-gram corpus contains no tokens");
  std::sort(model.vocab_.begin(), model.vocab_.end());
  model.vocab_.emplace_back(kUnknown);
  model.vocab_index_.insert(kUnknown);

  for (const auto& text : texts) {
    for (std::size_t i = 0; i < text.size(); ++i) {
      auto& ctx = model.contexts_[model.context_key({}, text.tokens(), i)];
      ++ctx.total;
      ++ctx.counts[text[i]];
    }
  }
  return model;
}

NgramModel NgramModel::uniform(std::span<const std::string> vocab) {
  NgramModel model;
  model.order_ = 1;
  model.smoothing_k_ = 1.0;
  model.cache_weight_ = 0.0;
  for (const auto& tok : vocab) {
    if (tok != kUnknown && model.vocab_index_.insert(tok).second) model.vocab_.push_back(tok);
  }
  std::sort(model.vocab_.begin(), model.vocab_.end());
  model.vocab_.emplace_back(kUnknown);
  model.vocab_index_.insert(kUnknown);
  return model;
}

const std::string& NgramModel::canonical(const std::string& token) const {
  static const std::string unknown = kUnknown;
  return vocab_index_.contains(token) ? token : unknown;
}

std::string NgramModel::context_key(std::span<const std::string> history,
                                    std::span<const std::string> tokens,
                                    std::size_t position) const {
  const auto width = static_cast<std::size_t>(order_ - 1);
  std::string key;
  for (std::size_t back = width; back >= 1; --back) {
    // Element `back` places before `position` in history ++ tokens.
    const std::size_t combined = history.size() + position;
    const std::string* tok = nullptr;
    if (combined >= back) {
      const std::size_t idx = combined - back;
      tok = idx < history.size() ? &history[idx] : &tokens[idx - history.size()];
    }
    if (back != width) key.push_back(kSep);
    key += tok == nullptr ? std::string(kBegin) : canonical(*tok);
  }
  return key;
}

std::pair<double, double> NgramModel::ratio_for_key(const std::string& key, const std::string& token) const {
  const double v = static_cast<double>(vocab_.size());
  const auto it = contexts_.find(key);
  if (it == contexts_.end()) return {1.0, v};
  const auto& ctx = it->second;
  const auto c = ctx.counts.find(canonical(token));
  const double count = c == ctx.counts.end() ? 0.0 : static_cast<double>(c->second);
  return {count + smoothing_k_, static_cast<double>(ctx.total) + smoothing_k_ * v};
}

double NgramModel::probability_for_key(const std::string& key, const std::string& token) const {
  const auto [num, den] = ratio_for_key(key, token);
  return num / den;
}

double NgramModel::probability(std::span<const std::string> context, const std::string& token) const {
  std::span<const std::string> none;
  return probability_for_key(context_key(context, none, 0), token);
}

std::vector<double> NgramModel::logprobs(std::span<const std::string> tokens,
                                         std::span<const std::string> history) const {
  std::vector<double> out;
  out.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    out.push_back(std::log(probability_for_key(context_key(history, tokens, i), tokens[i])));
  }
  return out;
}

double NgramModel::sequence_perplexity(std::span<const std::string> tokens,
                                       std::span<const std::string> condition) const {
  if (!condition.empty() && cache_weight_ != 0.0) return Scorer::sequence_perplexity(tokens, condition);
  std::map<std::pair<double, double>, std::size_t> groups;
  for (std::size_t i = 0; i < tokens.size(); ++i) ++groups[ratio_for_key(context_key(condition, tokens, i), tokens[i])];
  const double n = static_cast<double>(tokens.size());
  double ppl = 1.0;
  for (const auto& [ratio, count] : groups) ppl *= std::pow(ratio.second / ratio.first, static_cast<double>(count) / n);
  return ppl;
}

std::vector<double> NgramModel::conditional_logprobs(std::span<const std::string> tokens,
                                                     std::span<const std::string> condition) const {
  if (condition.empty() || cache_weight_ == 0.0) return logprobs(tokens, condition);
  std::unordered_map<std::string, std::size_t> cache;
  for (const auto& tok : condition) ++cache[canonical(tok)];
  const double cache_total = static_cast<double>(condition.size());
  std::vector<double> out;
  out.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const double base = probability_for_key(context_key(condition, tokens, i), tokens[i]);
    const auto hit = cache.find(canonical(tokens[i]));
    const double cached = hit == cache.end() ? 0.0 : static_cast<double>(hit->second) / cache_total;
    out.push_back(std::log((1.0 - cache_weight_) * base + cache_weight_ * cached));
  }
  return out;
}

std::string NgramModel::describe() const {
  std::ostringstream os;
  os << "ngram(order=" << order_ << ", k=" << smoothing_k_ << ", vocab=" << vocab_.size() << ")";
  return os.str();
}

std::vector<std::vector<std::string>> NgramModel::observed_contexts() const {
  std::vector<std::vector<std::string>> out;
  out.reserve(contexts_.size());
  for (const auto& [key, counts] : contexts_) out.push_back(split_key(key, order_ - 1));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace pct
