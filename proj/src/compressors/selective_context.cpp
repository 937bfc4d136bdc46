#include "pct/compressors/selective_context.hpp"

#include <algorithm>
#include <numeric>

#include "pct/compressors/selection.hpp"

namespace pct {
namespace {

// Summing in sorted order makes units with the same multiset of scores tie
// exactly, whatever the token order inside them.
double unit_surprisal(std::span<const double> self_info, std::size_t begin, std::size_t end) {
  std::vector<double> values(self_info.begin() + static_cast<std::ptrdiff_t>(begin),
                             self_info.begin() + static_cast<std::ptrdiff_t>(end));
  std::sort(values.begin(), values.end());
  return std::accumulate(values.begin(), values.end(), 0.0);
}

bool opens_unit(const TokenizedText& text, std::size_t i, Granularity granularity) {
  if (i == 0) return true;
  switch (granularity) {
    case Granularity::Token:
      return true;
    case Granularity::Phrase: {
      const auto& tok = text[i];
      const auto& prev = text[i - 1];
      if (is_punctuation(tok) || is_punctuation(prev)) return true;
      return is_stopword(tok) && !is_stopword(prev);
    }
    case Granularity::Sentence:
      return ends_sentence(text[i - 1]) && !ends_sentence(text[i]);
  }
  return true;
}

}  // namespace

std::vector<LexicalUnit> build_units(const TokenizedText& text, std::span<const double> self_info,
                                     Granularity granularity) {
  std::vector<LexicalUnit> units;
  std::size_t begin = 0;
  auto close = [&](std::size_t end) {
    if (end == begin) return;
    std::vector<std::size_t> members(end - begin);
    std::iota(members.begin(), members.end(), begin);
    units.push_back({begin, end, text.render(members), unit_surprisal(self_info, begin, end)});
    begin = end;
  };
  for (std::size_t i = 1; i < text.size(); ++i) {
    if (opens_unit(text, i, granularity)) close(i);
  }
  close(text.size());
  return units;
}

std::vector<bool> select_units(std::span<const LexicalUnit> units, std::span<const double> self_info,
                               std::size_t keep) {
  std::vector<bool> mask(self_info.size(), false);
  std::vector<std::size_t> order(units.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return units[a].surprisal > units[b].surprisal;
  });
  std::size_t kept = 0;
  for (std::size_t u : order) {
    if (kept >= keep) break;
    const auto& unit = units[u];
    const std::size_t room = keep - kept;
    if (unit.size() <= room) {
      for (std::size_t i = unit.begin; i < unit.end; ++i) mask[i] = true;
      kept += unit.size();
    } else {
      const auto part = self_info.subspan(unit.begin, unit.size());
      for (std::size_t i : top_k(part, room)) mask[unit.begin + i] = true;
      kept += room;
    }
  }
  return mask;
}

CompressionResult compress_selective_context(const CompressionRequest& request, const Scorer& scorer) {
  const auto text = tokenize(request.text);
  validate_request(request, text.size());
  if (text.empty()) return extractive_result(text, {}, {});

  const auto scores = token_logprobs(scorer, text);
  std::vector<double> self_info;
  self_info.reserve(scores.size());
  for (const auto& s : scores) self_info.push_back(s.self_information);

  const auto units = build_units(text, self_info, request.options.granularity);
  const auto mask = select_units(units, self_info, keep_count(request.ratio, text.size()));
  return extractive_result(text, mask, self_info);
}

}  // namespace pct
