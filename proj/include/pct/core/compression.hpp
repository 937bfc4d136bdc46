#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pct {

enum class CompressorKind { SelectiveContext, Lingua, LongLingua, SCRL, KiS };

inline constexpr CompressorKind kAllCompressors[] = {
    CompressorKind::SelectiveContext, CompressorKind::Lingua, CompressorKind::LongLingua,
    CompressorKind::SCRL, CompressorKind::KiS};

std::string_view to_string(CompressorKind kind);

// Accepts canonical names plus common aliases ("LLMLingua", "selective_context",
// "sc", ...), case-insensitively.
std::optional<CompressorKind> parse_compressor(std::string_view name);

bool is_extractive(CompressorKind kind);

enum class Granularity { Token, Phrase, Sentence };

std::string_view to_string(Granularity g);
std::optional<Granularity> parse_granularity(std::string_view name);

// Per-compressor knobs. Defaults are the documented behavior; requests only
// override what they need.
struct CompressorOptions {
  Granularity granularity = Granularity::Phrase;

  // Text kept ahead of the context; counted in the original length and never
  // compressed below instruction_floor of its tokens.
  std::optional<std::string> instruction;
  double instruction_floor = 1.0;
  // When set, the question is appended to the compressed prompt and counted in
  // the original length. Otherwise it only conditions relevance scoring.
  bool include_question = false;
  double question_floor = 1.0;

  double coarse_factor = 1.4;
  std::size_t segment_size = 64;

  int candidates = 4;
  double temperature = 0.7;
  double fluency_weight = 0.25;
  double salience_weight = 0.5;
  double simplicity_weight = 0.25;
};

struct CompressionRequest {
  std::string text;
  CompressorKind compressor = CompressorKind::SelectiveContext;
  double ratio = 0.0;
  std::optional<std::string> question;
  std::optional<std::int64_t> max_length;
  std::optional<std::uint64_t> seed;
  CompressorOptions options;
};

struct TraceEntry {
  std::string token;
  double score = 0.0;  // self-information in bits, or keep-probability for SCRL
  bool kept = false;

  friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

struct CompressionResult {
  std::string compressed;
  std::size_t original_len = 0;
  std::size_t compressed_len = 0;
  double achieved_ratio = 0.0;
  std::vector<TraceEntry> trace;
  std::vector<std::string> notes;
};

// 1 - compressed_len / original_len. Throws ParameterError when
// original_len == 0 or compressed_len > original_len.
double compute_ratio(std::size_t original_len, std::size_t compressed_len);

// Number of tokens to keep for a target ratio: ceil((1 - ratio) * length),
// never fewer than one token of a non-empty input.
std::size_t keep_count(double ratio, std::size_t length);

// Checks ratio and max_length against the request's compressor. original_len
// is the token length of the text to be compressed.
void validate_request(const CompressionRequest& request, std::size_t original_len);

std::string scrl_window_message(std::int64_t max_length, std::size_t original_len);
std::string kis_length_message(std::int64_t max_length, std::size_t original_len);

}  // namespace pct
