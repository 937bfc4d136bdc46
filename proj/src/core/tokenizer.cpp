#include "pct/core/tokenizer.hpp"

#include <algorithm>
#include <array>
#include <unordered_set>

namespace pct {
namespace {

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_word_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

bool is_joiner(unsigned char c) {
  return c == '.' || c == ',' || c == '\'' || c == '-' || c == '_';
}

}  // namespace

TokenizedText::TokenizedText(std::string source) : source_(std::move(source)) {
  const auto& s = source_;
  const std::size_t n = s.size();
  std::size_t i = 0;
  while (i < n) {
    const auto c = static_cast<unsigned char>(s[i]);
    if (is_space(c)) {
      ++i;
      continue;
    }
    if (is_word_byte(c)) {
      std::size_t j = i + 1;
      while (j < n) {
        const auto cj = static_cast<unsigned char>(s[j]);
        if (is_word_byte(cj)) {
          ++j;
        } else if (is_joiner(cj) && j + 1 < n && is_word_byte(static_cast<unsigned char>(s[j + 1]))) {
          j += 2;
        } else {
          break;
        }
      }
      offsets_.push_back({i, j});
      i = j;
    } else {
      offsets_.push_back({i, i + 1});
      ++i;
    }
  }
  tokens_.reserve(offsets_.size());
  for (const auto& span : offsets_) tokens_.emplace_back(s.substr(span.start, span.end - span.start));
}

std::string_view TokenizedText::separator(std::size_t a, std::size_t b) const {
  const std::size_t from = offsets_[a].end;
  const std::size_t to = offsets_[b].start;
  // newlines counts within one whitespace run; skipped tokens reset it.
  int newlines = 0;
  int most = 0;
  bool space = false;
  for (std::size_t i = from; i < to; ++i) {
    const auto c = static_cast<unsigned char>(source_[i]);
    if (c == '\n') {
      most = std::max(most, ++newlines);
    } else if (is_space(c)) {
      space = true;
    } else {
      newlines = 0;
      space = true;
    }
  }
  newlines = most;
  if (newlines >= 2) return "\n\n";
  if (newlines == 1) return "\n";
  if (space || b != a + 1) return " ";
  return "";
}

std::string TokenizedText::render(std::span<const std::size_t> indices) const {
  std::string out;
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (k > 0) out += separator(indices[k - 1], indices[k]);
    out += tokens_[indices[k]];
  }
  return out;
}

std::string TokenizedText::render_all() const {
  std::vector<std::size_t> all(tokens_.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return render(all);
}

TokenizedText tokenize(std::string text) { return TokenizedText(std::move(text)); }

std::string detokenize(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out += ' ';
    out += tokens[i];
  }
  return out;
}

bool is_punctuation(std::string_view token) {
  return !token.empty() && std::none_of(token.begin(), token.end(), [](char c) {
    return is_word_byte(static_cast<unsigned char>(c));
  });
}

bool is_stopword(std::string_view token) {
  static const std::unordered_set<std::string> kStopwords = {
      "a",     "an",    "the",   "and",   "or",    "but",   "if",    "then",  "so",    "of",
      "in",    "on",    "at",    "to",    "for",   "from",  "by",    "with",  "about", "as",
      "into",  "over",  "after", "before", "under", "between", "through", "during", "without",
      "is",    "are",   "was",   "were",  "be",    "been",  "being", "am",    "do",    "does",
      "did",   "has",   "have",  "had",   "having", "it",   "its",   "this",  "that",  "these",
      "those", "i",     "you",   "he",    "she",   "we",    "they",  "me",    "him",   "her",
      "us",    "them",  "my",    "your",  "his",   "our",   "their", "which", "who",   "whom",
      "what",  "when",  "where", "why",   "how",   "not",   "no",    "can",   "will",  "would",
      "should", "could", "may",  "might", "must",  "shall", "there", "here",  "than",  "too",
      "very",  "also",  "just",  "all",   "any",   "each",  "some",  "such",  "own",   "same",
      "other", "only",  "more",  "most",  "both",  "few",   "nor",   "up",    "down",  "out",
      "off",   "again", "once",  "because", "while", "until", "against", "above", "below"};
  if (token.empty() || token.size() > 16) return false;
  return kStopwords.contains(to_lower(token));
}

bool is_capitalized(std::string_view token) {
  return !token.empty() && token.front() >= 'A' && token.front() <= 'Z';
}

bool ends_sentence(std::string_view token) {
  return token == "." || token == "!" || token == "?";
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::vector<Span> split_blocks(std::string_view text) {
  std::vector<Span> blocks;
  std::size_t start = 0;
  const std::size_t n = text.size();
  auto flush = [&](std::size_t end) {
    std::size_t a = start;
    std::size_t b = end;
    while (a < b && is_space(static_cast<unsigned char>(text[a]))) ++a;
    while (b > a && is_space(static_cast<unsigned char>(text[b - 1]))) --b;
    if (a < b) blocks.push_back({a, b});
  };
  std::size_t i = 0;
  while (i < n) {
    if (text[i] != '\n') {
      ++i;
      continue;
    }
    // A blank line is a newline followed by optional horizontal space and another newline.
    std::size_t j = i + 1;
    while (j < n && text[j] != '\n' && is_space(static_cast<unsigned char>(text[j]))) ++j;
    if (j < n && text[j] == '\n') {
      flush(i);
      while (j < n && is_space(static_cast<unsigned char>(text[j]))) ++j;
      start = j;
      i = j;
    } else {
      i = j;
    }
  }
  flush(n);
  return blocks;
}

}  // namespace pct
