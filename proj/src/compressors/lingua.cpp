#include "pct/compressors/lingua.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pct/compressors/selection.hpp"
#include "pct/core/errors.hpp"
#include "pct/core/tokenizer.hpp"

namespace pct {
namespace {

std::size_t floor_tokens(double fraction, std::size_t length) {
  const auto need = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(length) - 1e-9));
  return std::min(need, length);
}

// One tokenized prompt segment with its selection state.
struct Piece {
  TokenizedText text;
  std::vector<bool> mask;
  std::vector<double> self_info;

  explicit Piece(std::string source) : text(tokenize(std::move(source))) {
    mask.assign(text.size(), false);
    self_info.assign(text.size(), 0.0);
  }
};

// Token index ranges [first, last) of the blank-line separated blocks.
std::vector<std::pair<std::size_t, std::size_t>> block_token_ranges(const TokenizedText& text) {
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  const auto& offsets = text.offsets();
  std::size_t t = 0;
  for (const auto& block : split_blocks(text.source())) {
    while (t < offsets.size() && offsets[t].start < block.start) ++t;
    const std::size_t first = t;
    while (t < offsets.size() && offsets[t].start < block.end) ++t;
    if (t > first) ranges.emplace_back(first, t);
  }
  return ranges;
}

void prune_piece(const Scorer& scorer, Piece& piece, std::size_t budget, std::size_t segment_size,
                 std::vector<std::string>& history) {
  if (piece.text.empty()) return;
  piece.mask = prune_tokens(scorer, piece.text.tokens(), budget, segment_size, history, piece.self_info);
}

// Output assembly: each part is a piece plus the token order in which it
// appears in the output (documents may be permuted).
struct Part {
  const Piece* piece;
  std::vector<std::size_t> order;
};

std::vector<std::size_t> all_positions(const Piece& piece) {
  std::vector<std::size_t> order(piece.text.size());
  std::iota(order.begin(), order.end(), 0);
  return order;
}

CompressionResult assemble(const std::vector<Part>& parts, std::size_t original_len) {
  CompressionResult result;
  result.original_len = original_len;
  for (const auto& part : parts) {
    std::vector<std::size_t> kept;
    for (std::size_t i : part.order) {
      const bool k = part.piece->mask[i];
      result.trace.push_back({part.piece->text[i], part.piece->self_info[i], k});
      if (k) kept.push_back(i);
    }
    if (kept.empty()) continue;
    if (!result.compressed.empty()) result.compressed += "\n\n";
    result.compressed += part.piece->text.render(kept);
    result.compressed_len += kept.size();
  }
  result.achieved_ratio = original_len == 0 ? 0.0 : compute_ratio(original_len, result.compressed_len);
  return result;
}

struct Layout {
  Piece instruction;
  Piece context;
  Piece question;
  std::size_t original_len = 0;
};

Layout make_layout(const CompressionRequest& request, bool question_in_prompt) {
  const auto& opt = request.options;
  Layout layout{Piece(opt.instruction.value_or("")), Piece(request.text),
                Piece(question_in_prompt ? request.question.value_or("") : "")};
  layout.original_len = layout.instruction.text.size() + layout.context.text.size() +
                        layout.question.text.size();
  return layout;
}

std::string budget_note(const Budget& budget) {
  return "budget overshoot: instruction and question floors need " +
         std::to_string(budget.instruction_tokens + budget.question_tokens) + " tokens, target is " +
         std::to_string(budget.target);
}

}  // namespace

Budget allocate_budget(std::size_t target, SegmentLengths lengths, double instruction_floor,
                       double question_floor) {
  Budget budget;
  budget.target = target;
  budget.instruction_tokens = floor_tokens(instruction_floor, lengths.instruction);
  budget.question_tokens = floor_tokens(question_floor, lengths.question);
  const std::size_t fixed = budget.instruction_tokens + budget.question_tokens;
  if (fixed > target) {
    budget.overshoot = true;
  } else {
    std::size_t remaining = target - fixed;
    budget.context_tokens = std::min(lengths.context, remaining);
    remaining -= budget.context_tokens;
    const std::size_t extra_instruction = std::min(lengths.instruction - budget.instruction_tokens, remaining);
    budget.instruction_tokens += extra_instruction;
    remaining -= extra_instruction;
    const std::size_t extra_question = std::min(lengths.question - budget.question_tokens, remaining);
    budget.question_tokens += extra_question;
  }
  budget.total_tokens = budget.instruction_tokens + budget.question_tokens + budget.context_tokens;
  return budget;
}

std::vector<std::size_t> select_demonstrations(std::span<const double> perplexities,
                                               std::span<const std::size_t> lengths,
                                               std::size_t context_budget, std::size_t coarse_budget) {
  std::vector<std::size_t> order(perplexities.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return perplexities[a] < perplexities[b]; });
  std::vector<std::size_t> kept;
  std::size_t total = 0;
  for (std::size_t d : order) {
    if (total < context_budget || total + lengths[d] <= coarse_budget) {
      kept.push_back(d);
      total += lengths[d];
    }
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

std::vector<bool> prune_tokens(const Scorer& scorer, std::span<const std::string> tokens,
                               std::size_t budget, std::size_t segment_size,
                               std::vector<std::string>& history, std::vector<double>& self_info) {
  if (segment_size == 0) throw ParameterError("segment_size", "segment_size must be positive");
  std::vector<bool> mask(tokens.size(), false);
  self_info.assign(tokens.size(), 0.0);
  std::vector<std::size_t> sizes;
  for (std::size_t start = 0; start < tokens.size(); start += segment_size) {
    sizes.push_back(std::min(segment_size, tokens.size() - start));
  }
  const auto shares = prorate(budget, sizes);
  std::size_t start = 0;
  for (std::size_t s = 0; s < sizes.size(); ++s) {
    const auto segment = tokens.subspan(start, sizes[s]);
    const auto lps = scorer.logprobs(segment, history);
    std::vector<double> info(lps.size());
    for (std::size_t i = 0; i < lps.size(); ++i) {
      info[i] = self_information_bits(lps[i]);
      self_info[start + i] = info[i];
    }
    for (std::size_t i : top_k(info, shares[s])) {
      mask[start + i] = true;
      history.push_back(segment[i]);
    }
    start += sizes[s];
  }
  return mask;
}

std::vector<double> document_relevance(const std::string& question,
                                       std::span<const std::string> documents, const Scorer& scorer) {
  if (documents.empty()) throw ParameterError("documents", "document list must not be empty");
  const auto q = tokenize(question);
  if (q.empty()) throw ParameterError("question", "question must not be empty");
  const double base = perplexity(scorer, q.tokens());
  std::vector<double> relevance;
  relevance.reserve(documents.size());
  for (const auto& doc : documents) {
    const auto d = tokenize(doc);
    relevance.push_back(base - perplexity(scorer, q.tokens(), d.tokens()));
  }
  return relevance;
}

std::vector<std::size_t> order_by_relevance(std::span<const double> relevance) {
  std::vector<std::size_t> order(relevance.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return relevance[a] > relevance[b]; });
  return order;
}

std::vector<std::size_t> rank_documents(const std::string& question,
                                        std::span<const std::string> documents, const Scorer& scorer) {
  return order_by_relevance(document_relevance(question, documents, scorer));
}

std::vector<std::size_t> linear_rank_budgets(std::size_t budget, std::span<const std::size_t> lengths) {
  const std::size_t n = lengths.size();
  std::vector<std::size_t> out(n, 0);
  std::size_t remaining = std::min(budget, std::accumulate(lengths.begin(), lengths.end(), std::size_t{0}));
  std::size_t weight_left = n * (n + 1) / 2;
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t weight = n - r;
    const std::size_t share = (remaining * weight + weight_left - 1) / weight_left;
    out[r] = std::min(lengths[r], share);
    remaining -= out[r];
    weight_left -= weight;
  }
  for (std::size_t r = 0; r < n && remaining > 0; ++r) {
    const std::size_t extra = std::min(lengths[r] - out[r], remaining);
    out[r] += extra;
    remaining -= extra;
  }
  return out;
}

CompressionResult compress_lingua(const CompressionRequest& request, const Scorer& scorer) {
  const auto& opt = request.options;
  auto layout = make_layout(request, opt.include_question);
  validate_request(request, layout.original_len);
  if (layout.original_len == 0) return assemble({}, 0);

  const auto budget = allocate_budget(
      keep_count(request.ratio, layout.original_len),
      {layout.instruction.text.size(), layout.context.text.size(), layout.question.text.size()},
      opt.instruction_floor, opt.question_floor);

  std::vector<std::string> history;
  prune_piece(scorer, layout.instruction, budget.instruction_tokens, opt.segment_size, history);

  auto& ctx = layout.context;
  if (!ctx.text.empty()) {
    // Coarse stage over demonstrations.
    const auto blocks = block_token_ranges(ctx.text);
    std::vector<std::size_t> survivors(blocks.size());
    std::iota(survivors.begin(), survivors.end(), 0);
    if (blocks.size() > 1 && budget.context_tokens < ctx.text.size()) {
      std::vector<double> ppl;
      std::vector<std::size_t> lengths;
      for (const auto& [first, last] : blocks) {
        const auto tokens = std::span(ctx.text.tokens()).subspan(first, last - first);
        const auto lps = scorer.logprobs(tokens, {});
        double nll = 0.0;
        for (std::size_t i = 0; i < lps.size(); ++i) {
          nll -= lps[i];
          ctx.self_info[first + i] = self_information_bits(lps[i]);
        }
        ppl.push_back(std::exp(nll / static_cast<double>(lps.size())));
        lengths.push_back(last - first);
      }
      const auto coarse = static_cast<std::size_t>(
          std::ceil(opt.coarse_factor * static_cast<double>(budget.context_tokens) - 1e-9));
      survivors = select_demonstrations(ppl, lengths, budget.context_tokens, coarse);
    }

    // Fine stage over the surviving tokens.
    std::vector<std::size_t> positions;
    std::vector<std::string> tokens;
    for (std::size_t b : survivors) {
      for (std::size_t i = blocks[b].first; i < blocks[b].second; ++i) {
        positions.push_back(i);
        tokens.push_back(ctx.text[i]);
      }
    }
    std::vector<double> info;
    const auto mask = prune_tokens(scorer, tokens, budget.context_tokens, opt.segment_size, history, info);
    for (std::size_t k = 0; k < positions.size(); ++k) {
      ctx.mask[positions[k]] = mask[k];
      ctx.self_info[positions[k]] = info[k];
    }
  }

  prune_piece(scorer, layout.question, budget.question_tokens, opt.segment_size, history);

  auto result = assemble({{&layout.instruction, all_positions(layout.instruction)},
                          {&layout.context, all_positions(layout.context)},
                          {&layout.question, all_positions(layout.question)}},
                         layout.original_len);
  if (budget.overshoot) result.notes.push_back(budget_note(budget));
  return result;
}

CompressionResult compress_long_lingua(const CompressionRequest& request, const Scorer& scorer) {
  const bool has_question = request.question && !tokenize(*request.question).empty();
  if (!has_question) {
    auto result = compress_lingua(request, scorer);
    result.notes.insert(result.notes.begin(),
                        "no question given: LongLingua fell back to Lingua without reordering");
    return result;
  }

  const auto& opt = request.options;
  auto layout = make_layout(request, opt.include_question);
  validate_request(request, layout.original_len);

  const auto budget = allocate_budget(
      keep_count(request.ratio, layout.original_len),
      {layout.instruction.text.size(), layout.context.text.size(), layout.question.text.size()},
      opt.instruction_floor, opt.question_floor);

  std::vector<std::string> history;
  prune_piece(scorer, layout.instruction, budget.instruction_tokens, opt.segment_size, history);

  auto& ctx = layout.context;
  const auto blocks = block_token_ranges(ctx.text);
  std::vector<Part> parts{{&layout.instruction, all_positions(layout.instruction)}};
  std::vector<std::size_t> ranked;
  if (!blocks.empty()) {
    std::vector<std::string> documents;
    for (const auto& [first, last] : blocks) {
      documents.push_back(ctx.text.source().substr(
          ctx.text.offsets()[first].start, ctx.text.offsets()[last - 1].end - ctx.text.offsets()[first].start));
    }
    ranked = rank_documents(*request.question, documents, scorer);
    std::vector<std::size_t> lengths;
    for (std::size_t d : ranked) lengths.push_back(blocks[d].second - blocks[d].first);
    const auto budgets = linear_rank_budgets(budget.context_tokens, lengths);

    for (std::size_t r = 0; r < ranked.size(); ++r) {
      const auto [first, last] = blocks[ranked[r]];
      const auto tokens = std::span(ctx.text.tokens()).subspan(first, last - first);
      std::vector<double> info;
      const auto mask = prune_tokens(scorer, tokens, budgets[r], opt.segment_size, history, info);
      Part part{&ctx, {}};
      for (std::size_t k = 0; k < tokens.size(); ++k) {
        ctx.mask[first + k] = mask[k];
        ctx.self_info[first + k] = info[k];
        part.order.push_back(first + k);
      }
      parts.push_back(std::move(part));
    }
  }

  prune_piece(scorer, layout.question, budget.question_tokens, opt.segment_size, history);
  parts.push_back({&layout.question, all_positions(layout.question)});

  auto result = assemble(parts, layout.original_len);
  if (budget.overshoot) result.notes.push_back(budget_note(budget));
  std::string order = "document order:";
  for (std::size_t d : ranked) order += " " + std::to_string(d);
  result.notes.push_back(order);
  return result;
}

}  // namespace pct
