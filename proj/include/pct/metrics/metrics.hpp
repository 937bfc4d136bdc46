#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pct::metrics {

struct MetricValue {
  MetricValue() = default;
  explicit MetricValue(std::string metric_name) : name(std::move(metric_name)) {}

  std::string name;
  double value = 0.0;
  std::map<std::string, double> components;
  bool degenerate = false;  // both inputs empty
  bool skipped = false;     // metric could not be computed (e.g. no endpoint)
  std::string note;
};

struct BleuOptions {
  int max_n = 4;
  // Add-one smoothing of the orders above 1.
  bool smoothing = false;
};

// Sentence BLEU over toolkit tokens: geometric mean of clipped n-gram
// precisions times the brevity penalty, with the effective reference length
// being the closest reference length (shorter wins ties). Orders longer than
// the candidate are left out of the mean, so bleu(x, {x}) == 1 for any
// non-empty x. Without smoothing a zero precision at any order gives 0.
MetricValue bleu(std::string_view candidate, std::span<const std::string> references,
                 BleuOptions options = {});

struct RougeVariant {
  enum class Kind { N, L } kind = Kind::L;
  int n = 1;

  static RougeVariant L() { return {Kind::L, 0}; }
  static RougeVariant N(int n) { return {Kind::N, n}; }
};

// ROUGE-N: n-gram overlap F1. ROUGE-L: LCS F1 with precision = LCS/|candidate|
// and recall = LCS/|reference|.
MetricValue rouge(std::string_view candidate, std::string_view reference, RougeVariant variant);

// F1 over the token multisets.
MetricValue token_f1(std::string_view candidate, std::string_view reference);

enum class EditUnit { Char, Token };

// Levenshtein distance with unit costs. value is the distance; the
// "similarity" component is 1 - d / max(|a|, |b|) (1 when both are empty).
// Char units are Unicode code points.
MetricValue edit_distance(std::string_view a, std::string_view b, EditUnit unit);

std::size_t levenshtein(std::span<const std::u32string::value_type> a,
                        std::span<const std::u32string::value_type> b);
std::size_t levenshtein(std::span<const std::string> a, std::span<const std::string> b);
std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

std::u32string decode_utf8(std::string_view s);

enum class AnswerTask { Gsm8k, Boolean, MultipleChoice, Freeform };

std::optional<AnswerTask> parse_answer_task(std::string_view name);

// gsm8k: last number after the last "####", else the last number in the text
// (thousands separators removed). boolean: last True/False, case-insensitive,
// returned as "True"/"False". multiple_choice: letter of the last "(X)".
// freeform: trimmed text. Returns "" when nothing can be extracted.
std::string extract_answer(std::string_view llm_output, AnswerTask task);

// Whitespace and case normalization plus numeric canonicalization (6 == 6.0).
std::string normalize_answer(std::string_view answer);

// Exact-match rate after normalize_answer. Throws ParameterError on a length
// mismatch. An empty list scores 0 with the degenerate flag.
MetricValue accuracy(std::span<const std::string> predictions, std::span<const std::string> golds);

// Returns one embedding vector per input text.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<std::vector<double>> embed(std::span<const std::string> texts) const = 0;
};

double cosine(std::span<const double> a, std::span<const double> b);

// Greedy-matching similarity over per-token embeddings: P is the mean over
// candidate tokens of the best cosine against reference tokens, R the mirror
// image, F1 their harmonic mean. A null embedder or an embedding failure
// marks the metric skipped.
MetricValue bertscore(std::string_view candidate, std::string_view reference, const Embedder* embedder);

}  // namespace pct::metrics
