#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "pct/compressors/kis.hpp"
#include "pct/core/errors.hpp"
#include "pct/core/tokenizer.hpp"
#include "pct/net/transport.hpp"
#include "pct/scorer/ngram.hpp"
#include "pct/scorer/scorer.hpp"

namespace pct::test {

inline std::filesystem::path data_dir() { return PCT_TEST_DATA_DIR; }

// Assigns each token a fixed self-information in bits, independent of context.
// Unlisted tokens get `fallback` bits.
class TableScorer final : public Scorer {
 public:
  explicit TableScorer(std::map<std::string, double> bits, double fallback = 1.0)
      : bits_(std::move(bits)), fallback_(fallback) {}

  std::vector<double> logprobs(std::span<const std::string> tokens,
                               std::span<const std::string>) const override {
    std::vector<double> out;
    for (const auto& t : tokens) {
      auto it = bits_.find(t);
      out.push_back(-(it == bits_.end() ? fallback_ : it->second) * std::log(2.0));
    }
    return out;
  }
  std::string describe() const override { return "table"; }

 private:
  std::map<std::string, double> bits_;
  double fallback_;
};

// Multiplies every log-probability of the wrapped scorer by c, which scales
// every self-information value by c.
class ScaledScorer final : public Scorer {
 public:
  ScaledScorer(const Scorer& inner, double c) : inner_(inner), c_(c) {}

  std::vector<double> logprobs(std::span<const std::string> tokens,
                               std::span<const std::string> history) const override {
    auto out = inner_.logprobs(tokens, history);
    for (double& v : out) v *= c_;
    return out;
  }
  std::vector<double> conditional_logprobs(std::span<const std::string> tokens,
                                           std::span<const std::string> condition) const override {
    auto out = inner_.conditional_logprobs(tokens, condition);
    for (double& v : out) v *= c_;
    return out;
  }
  std::string describe() const override { return "scaled"; }

 private:
  const Scorer& inner_;
  double c_;
};

class FixedGenerator final : public Generator {
 public:
  explicit FixedGenerator(std::vector<std::string> candidates) : candidates_(std::move(candidates)) {}

  std::vector<std::string> generate(const GenerationRequest& request) const override {
    last_request = request;
    return candidates_;
  }
  std::string describe() const override { return "fixed"; }

  mutable GenerationRequest last_request;

 private:
  std::vector<std::string> candidates_;
};

// Replays a fixed list of replies in order (the last one repeats) and keeps
// every request it saw.
class ScriptedTransport final : public net::Transport {
 public:
  explicit ScriptedTransport(std::vector<net::HttpReply> replies) : replies_(std::move(replies)) {}

  net::HttpReply post(const std::string& path, const std::string& body) const override {
    std::lock_guard lock(mutex_);
    requests.push_back({path, body});
    const auto& r = replies_[std::min(calls_++, replies_.size() - 1)];
    return r;
  }
  void probe() const override {
    if (unreachable) throw UpstreamError(0, "scripted endpoint unreachable");
  }

  bool unreachable = false;
  mutable std::vector<std::pair<std::string, std::string>> requests;

 private:
  std::vector<net::HttpReply> replies_;
  mutable std::size_t calls_ = 0;
  mutable std::mutex mutex_;
};

inline net::HttpReply json_reply(const nlohmann::json& body, int status = 200) {
  return {status, body.dump(), 1.0};
}

inline const std::vector<std::string>& word_pool() {
  static const std::vector<std::string> pool = {
      "the",   "a",     "of",     "and",   "to",     "in",    "model", "prompt", "token", "river",
      "city",  "Paris", "report", "said",  "cold",   "quick", "data",  "score",  "it",    "was",
      "is",    "new",   "London", "42",    "3.5",    "don't", "state-of-the-art", "on", "with", "for"};
  return pool;
}

// Random prose-like text: words, punctuation, and optional blank-line blocks.
inline std::string random_text(std::mt19937_64& rng, std::size_t min_words, std::size_t max_words,
                               bool blocks = false) {
  const auto& pool = word_pool();
  std::uniform_int_distribution<std::size_t> len(min_words, max_words);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::uniform_int_distribution<int> roll(0, 99);
  const std::size_t n = len(rng);
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      const int r = roll(rng);
      if (blocks && r < 6) {
        out += "\n\n";
      } else if (r < 9) {
        out += "\n";
      } else {
        out += ' ';
      }
    }
    out += pool[pick(rng)];
    const int p = roll(rng);
    if (p < 8) out += ',';
    else if (p < 14) out += '.';
    else if (p < 16) out += '?';
  }
  return out;
}

inline NgramModel english_model(int order = 2) {
  static const std::string corpus =
      "the model reads the prompt and the model scores every token . a river runs through the city . "
      "Paris is a city on a river . the report said the data was new . it was cold in London , and "
      "the quick model was state-of-the-art . the score of the token is 42 , or 3.5 for the prompt .";
  const auto tokens = tokenize(corpus);
  return NgramModel::fit(tokens.tokens(), order, 0.1);
}

// Independent oracles: top-down recursions straight from the definitions,
// memoized over suffix pairs.
template <class Seq>
std::size_t recursive_edit_distance(const Seq& a, const Seq& b) {
  std::vector<std::vector<long>> memo(a.size() + 1, std::vector<long>(b.size() + 1, -1));
  auto go = [&](auto&& self, std::size_t i, std::size_t j) -> std::size_t {
    if (i == a.size()) return b.size() - j;
    if (j == b.size()) return a.size() - i;
    auto& m = memo[i][j];
    if (m >= 0) return static_cast<std::size_t>(m);
    const std::size_t best = std::min({self(self, i + 1, j + 1) + (a[i] == b[j] ? 0 : 1),
                                       self(self, i + 1, j) + 1, self(self, i, j + 1) + 1});
    m = static_cast<long>(best);
    return best;
  };
  return go(go, 0, 0);
}

template <class Seq>
std::size_t recursive_lcs(const Seq& a, const Seq& b) {
  std::vector<std::vector<long>> memo(a.size() + 1, std::vector<long>(b.size() + 1, -1));
  auto go = [&](auto&& self, std::size_t i, std::size_t j) -> std::size_t {
    if (i == a.size() || j == b.size()) return 0;
    auto& m = memo[i][j];
    if (m >= 0) return static_cast<std::size_t>(m);
    const std::size_t best = a[i] == b[j] ? 1 + self(self, i + 1, j + 1)
                                          : std::max(self(self, i + 1, j), self(self, i, j + 1));
    m = static_cast<long>(best);
    return best;
  };
  return go(go, 0, 0);
}

// "abc" -> "a b c", so each character is one toolkit token.
inline std::string spaced(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (!out.empty()) out += ' ';
    out += c;
  }
  return out;
}

inline bool is_subsequence(const std::vector<std::string>& small, const std::vector<std::string>& big) {
  std::size_t j = 0;
  for (std::size_t i = 0; i < big.size() && j < small.size(); ++i) {
    if (big[i] == small[j]) ++j;
  }
  return j == small.size();
}

// Every string over the alphabet with length 0..max_len.
inline std::vector<std::string> all_strings(const std::string& alphabet, std::size_t max_len) {
  std::vector<std::string> out{""};
  std::vector<std::string> frontier{""};
  for (std::size_t len = 1; len <= max_len; ++len) {
    std::vector<std::string> next;
    for (const auto& s : frontier) {
      for (char c : alphabet) next.push_back(s + c);
    }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

}  // namespace pct::test
