#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pct/core/compression.hpp"
#include "pct/scorer/scorer.hpp"

namespace pct {

// Token budget split across the prompt segments. The four counts always
// satisfy instruction + question + context == total.
struct Budget {
  std::size_t instruction_tokens = 0;
  std::size_t question_tokens = 0;
  std::size_t context_tokens = 0;
  std::size_t total_tokens = 0;
  std::size_t target = 0;
  bool overshoot = false;  // instruction and question floors alone exceed target
};

struct SegmentLengths {
  std::size_t instruction = 0;
  std::size_t context = 0;
  std::size_t question = 0;
};

// Instruction and question first receive ceil(floor * length) tokens. The
// context gets what remains of target (capped at its length); any slack left
// after that tops the instruction and then the question back up to full.
Budget allocate_budget(std::size_t target, SegmentLengths lengths, double instruction_floor = 1.0,
                       double question_floor = 1.0);

// Coarse stage: indices of the demonstrations that survive, ascending.
// Demonstrations are taken in ascending perplexity order (ties to the earlier
// one); each is kept while the running total is still below context_budget or
// still fits within coarse_budget.
std::vector<std::size_t> select_demonstrations(std::span<const double> perplexities,
                                               std::span<const std::size_t> lengths,
                                               std::size_t context_budget, std::size_t coarse_budget);

// Fine stage: iterative token-level pruning. Tokens are processed in segments
// of segment_size; each segment is scored conditioned on every token kept so
// far (history is extended in place) and keeps its prorated share of budget,
// dropping lowest self-information tokens first. Writes each token's
// self-information into self_info.
std::vector<bool> prune_tokens(const Scorer& scorer, std::span<const std::string> tokens,
                               std::size_t budget, std::size_t segment_size,
                               std::vector<std::string>& history, std::vector<double>& self_info);

// relevance(d) = perplexity(question) - perplexity(question | d).
std::vector<double> document_relevance(const std::string& question,
                                       std::span<const std::string> documents, const Scorer& scorer);

// Indices sorted by descending score, ties to the earlier index.
std::vector<std::size_t> order_by_relevance(std::span<const double> relevance);

std::vector<std::size_t> rank_documents(const std::string& question,
                                        std::span<const std::string> documents, const Scorer& scorer);

// Per-document budgets for documents listed in rank order: rank r of n has
// weight n - r. Each document takes ceil of its weighted share of what is
// left, capped at its length; any remainder fills documents in rank order.
std::vector<std::size_t> linear_rank_budgets(std::size_t budget, std::span<const std::size_t> lengths);

CompressionResult compress_lingua(const CompressionRequest& request, const Scorer& scorer);
CompressionResult compress_long_lingua(const CompressionRequest& request, const Scorer& scorer);

}  // namespace pct
