#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pct/core/compression.hpp"
#include "pct/core/tokenizer.hpp"

namespace pct {

// Indices of the k largest values in ascending index order. Ties go to the
// earlier position.
std::vector<std::size_t> top_k(std::span<const double> values, std::size_t k);

// Splits total across parts proportionally to sizes by largest remainder
// (ties to the earlier part). Requires total <= sum(sizes); every share is
// at most its size and the shares sum to total exactly.
std::vector<std::size_t> prorate(std::size_t total, std::span<const std::size_t> sizes);

// Positions i with mask[i] set, ascending.
std::vector<std::size_t> kept_indices(const std::vector<bool>& mask);

// Assembles a result for an extractive selection over one tokenized text.
CompressionResult extractive_result(const TokenizedText& text, const std::vector<bool>& mask,
                                    std::span<const double> scores);

}  // namespace pct
