#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pct {

struct Span {
  std::size_t start = 0;
  std::size_t end = 0;  // exclusive

  friend bool operator==(const Span&, const Span&) = default;
};

// A prompt as an ordered token sequence with byte offsets back into the source.
//
// Splitting rule: whitespace separates tokens; every ASCII punctuation byte is
// its own token, except '.', ',', '\'', '-' and '_' when flanked on both sides
// by word bytes ("6.0", "don't", "state-of-the-art" stay whole). Word bytes are
// ASCII alphanumerics and every byte >= 0x80, so UTF-8 sequences are never split.
class TokenizedText {
 public:
  TokenizedText() = default;
  explicit TokenizedText(std::string source);

  const std::string& source() const noexcept { return source_; }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  const std::vector<Span>& offsets() const noexcept { return offsets_; }
  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }
  const std::string& operator[](std::size_t i) const { return tokens_[i]; }

  // Whitespace to emit between kept tokens a < b: "\n\n" when the source has a
  // blank line between them, "\n" for a single newline, " " for other
  // whitespace or when tokens in between were dropped, "" when they touch.
  std::string_view separator(std::size_t a, std::size_t b) const;

  // Renders the tokens at the given strictly increasing indices.
  std::string render(std::span<const std::size_t> indices) const;
  std::string render_all() const;

 private:
  std::string source_;
  std::vector<std::string> tokens_;
  std::vector<Span> offsets_;
};

TokenizedText tokenize(std::string text);

// Joins tokens with single spaces; the inverse of tokenize up to whitespace.
std::string detokenize(std::span<const std::string> tokens);

bool is_punctuation(std::string_view token);
bool is_stopword(std::string_view token);
bool is_capitalized(std::string_view token);
bool ends_sentence(std::string_view token);

std::string to_lower(std::string_view s);

// Byte ranges of the blank-line separated blocks of text, skipping blocks that
// hold only whitespace.
std::vector<Span> split_blocks(std::string_view text);

}  // namespace pct
