#include "pct/core/compression.hpp"

#include <algorithm>
#include <cmath>

#include "pct/core/errors.hpp"
#include "pct/core/tokenizer.hpp"

namespace pct {

std::string_view to_string(CompressorKind kind) {
  switch (kind) {
    case CompressorKind::SelectiveContext: return "SelectiveContext";
    case CompressorKind::Lingua: return "Lingua";
    case CompressorKind::LongLingua: return "LongLingua";
    case CompressorKind::SCRL: return "SCRL";
    case CompressorKind::KiS: return "KiS";
  }
  return "unknown";
}

std::optional<CompressorKind> parse_compressor(std::string_view name) {
  std::string key;
  for (char c : name) {
    if (c != '_' && c != '-' && c != ' ') key.push_back(c);
  }
  key = to_lower(key);
  if (key == "selectivecontext" || key == "sc" || key == "sccompressor") {
    return CompressorKind::SelectiveContext;
  }
  if (key == "lingua" || key == "llmlingua" || key == "linguacompressor") return CompressorKind::Lingua;
  if (key == "longlingua" || key == "longllmlingua" || key == "longlinguacompressor") {
    return CompressorKind::LongLingua;
  }
  if (key == "scrl" || key == "scrlcompressor") return CompressorKind::SCRL;
  if (key == "kis" || key == "kiscompressor") return CompressorKind::KiS;
  return std::nullopt;
}

bool is_extractive(CompressorKind kind) { return kind != CompressorKind::KiS; }

std::string_view to_string(Granularity g) {
  switch (g) {
    case Granularity::Token: return "token";
    case Granularity::Phrase: return "phrase";
    case Granularity::Sentence: return "sentence";
  }
  return "unknown";
}

std::optional<Granularity> parse_granularity(std::string_view name) {
  const std::string key = to_lower(name);
  if (key == "token") return Granularity::Token;
  if (key == "phrase") return Granularity::Phrase;
  if (key == "sentence") return Granularity::Sentence;
  return std::nullopt;
}

double compute_ratio(std::size_t original_len, std::size_t compressed_len) {
  if (original_len == 0) {
    throw ParameterError("original_len", "compression ratio is undefined for an empty original");
  }
  if (compressed_len > original_len) {
    throw ParameterError("compressed_len", "compressed length " + std::to_string(compressed_len) +
                                               " exceeds original length " +
                                               std::to_string(original_len));
  }
  return 1.0 - static_cast<double>(compressed_len) / static_cast<double>(original_len);
}

std::size_t keep_count(double ratio, std::size_t length) {
  if (length == 0) return 0;
  // The epsilon absorbs representation error such as (1 - 0.3) * 10 = 7.000000000000001.
  const double raw = (1.0 - ratio) * static_cast<double>(length);
  const auto keep = static_cast<std::size_t>(std::max(0.0, std::ceil(raw - 1e-9)));
  return std::clamp<std::size_t>(keep, 1, length);
}

std::string scrl_window_message(std::int64_t max_length, std::size_t original_len) {
  return "max_length " + std::to_string(max_length) +
         " is invalid for SCRL: max_length is the context window and must not exceed the "
         "original context length (" +
         std::to_string(original_len) + " tokens)";
}

std::string kis_length_message(std::int64_t max_length, std::size_t original_len) {
  return "max_length " + std::to_string(max_length) +
         " is invalid for KiS: max_length is the maximum input length and must be at least the "
         "original context length (" +
         std::to_string(original_len) + " tokens)";
}

void validate_request(const CompressionRequest& request, std::size_t original_len) {
  if (!(request.ratio >= 0.0 && request.ratio < 1.0)) {
    throw ParameterError("ratio", "ratio must lie in [0, 1), got " + std::to_string(request.ratio));
  }
  if (request.max_length) {
    const auto max_length = *request.max_length;
    if (max_length <= 0) {
      throw ParameterError("max_length", "max_length must be a positive integer");
    }
    if (request.compressor == CompressorKind::SCRL &&
        static_cast<std::uint64_t>(max_length) > original_len) {
      throw ParameterError("max_length", scrl_window_message(max_length, original_len));
    }
    if (request.compressor == CompressorKind::KiS &&
        static_cast<std::uint64_t>(max_length) < original_len) {
      throw ParameterError("max_length", kis_length_message(max_length, original_len));
    }
  }
  const auto& opt = request.options;
  if (!(opt.instruction_floor >= 0.0 && opt.instruction_floor <= 1.0)) {
    throw ParameterError("instruction_floor", "instruction_floor must lie in [0, 1]");
  }
  if (!(opt.question_floor >= 0.0 && opt.question_floor <= 1.0)) {
    throw ParameterError("question_floor", "question_floor must lie in [0, 1]");
  }
  if (!(opt.coarse_factor >= 1.0)) {
    throw ParameterError("coarse_factor", "coarse_factor must be at least 1");
  }
  if (opt.segment_size == 0) {
    throw ParameterError("segment_size", "segment_size must be positive");
  }
  if (opt.candidates < 1) {
    throw ParameterError("candidates", "candidates must be at least 1");
  }
  const double weights[] = {opt.fluency_weight, opt.salience_weight, opt.simplicity_weight};
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ParameterError("weights", "KiS reward weights must be non-negative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ParameterError("weights", "KiS reward weights must sum to 1");
  }
}

}  // namespace pct
