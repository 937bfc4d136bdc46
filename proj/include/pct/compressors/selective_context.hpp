#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pct/core/compression.hpp"
#include "pct/core/tokenizer.hpp"
#include "pct/scorer/scorer.hpp"

namespace pct {

// A contiguous token span filtered as one piece.
struct LexicalUnit {
  std::size_t begin = 0;  // token index, inclusive
  std::size_t end = 0;    // token index, exclusive
  std::string text;
  double surprisal = 0.0;  // summed self-information of member tokens, bits

  std::size_t size() const noexcept { return end - begin; }
};

// Partitions the tokens into units.
//   token:    one unit per token
//   phrase:   punctuation stands alone; a run of stopwords opens a new phrase
//             that extends over the content words after it
//   sentence: units end after '.', '!' or '?'
std::vector<LexicalUnit> build_units(const TokenizedText& text, std::span<const double> self_info,
                                     Granularity granularity);

// Keeps units in descending surprisal order (ties to the earlier unit) until
// exactly `keep` tokens are kept. The unit that crosses the limit contributes
// its highest self-information tokens only.
std::vector<bool> select_units(std::span<const LexicalUnit> units, std::span<const double> self_info,
                               std::size_t keep);

CompressionResult compress_selective_context(const CompressionRequest& request, const Scorer& scorer);

}  // namespace pct
