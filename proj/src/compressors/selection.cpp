#include "pct/compressors/selection.hpp"

#include <algorithm>
#include <numeric>

#include "pct/core/errors.hpp"

namespace pct {

std::vector<std::size_t> top_k(std::span<const double> values, std::size_t k) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  k = std::min(k, values.size());
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  order.resize(k);
  std::sort(order.begin(), order.end());
  return order;
}

std::vector<std::size_t> prorate(std::size_t total, std::span<const std::size_t> sizes) {
  const std::size_t sum = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
  if (total > sum) throw ParameterError("budget", "budget exceeds the available tokens");
  std::vector<std::size_t> shares(sizes.size(), 0);
  if (sum == 0) return shares;
  std::vector<std::size_t> remainders(sizes.size(), 0);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const std::size_t scaled = total * sizes[i];
    shares[i] = scaled / sum;
    remainders[i] = scaled % sum;
    assigned += shares[i];
  }
  std::vector<std::size_t> order(sizes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
  for (std::size_t k = 0; assigned < total; ++k) {
    ++shares[order[k]];
    ++assigned;
  }
  return shares;
}

std::vector<std::size_t> kept_indices(const std::vector<bool>& mask) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) out.push_back(i);
  }
  return out;
}

CompressionResult extractive_result(const TokenizedText& text, const std::vector<bool>& mask,
                                    std::span<const double> scores) {
  CompressionResult result;
  const auto kept = kept_indices(mask);
  result.compressed = text.render(kept);
  result.original_len = text.size();
  result.compressed_len = kept.size();
  result.achieved_ratio = text.empty() ? 0.0 : compute_ratio(text.size(), kept.size());
  result.trace.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    result.trace.push_back({text[i], i < scores.size() ? scores[i] : 0.0, static_cast<bool>(mask[i])});
  }
  return result;
}

}  // namespace pct
