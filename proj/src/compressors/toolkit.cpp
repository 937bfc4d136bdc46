#include "pct/compressors/toolkit.hpp"

#include "pct/core/errors.hpp"
#include "pct/core/tokenizer.hpp"

namespace pct {

CompressionResult compress(const CompressionRequest& request, const Backends& backends) {
  if (!backends.scorer) throw ConfigError("no scorer backend configured");
  const auto& scorer = *backends.scorer;
  switch (request.compressor) {
    case CompressorKind::SelectiveContext:
      return compress_selective_context(request, scorer);
    case CompressorKind::Lingua:
      return compress_lingua(request, scorer);
    case CompressorKind::LongLingua:
      return compress_long_lingua(request, scorer);
    case CompressorKind::SCRL:
      return compress_scrl(request, backends.scrl_policy, scorer);
    case CompressorKind::KiS:
      validate_request(request, tokenize(request.text).size());
      if (!backends.generator) throw ConfigError("KiS needs a generation endpoint and none is configured");
      return compress_kis(request, *backends.generator, scorer);
  }
  throw ParameterError("compressor", "unknown compressor");
}

namespace {

nlohmann::json common_parameters() {
  return {{"text", {{"type", "string"}, {"required", true}}},
          {"ratio", {{"type", "number"}, {"minimum", 0}, {"exclusiveMaximum", 1}, {"required", true}}}};
}

}  // namespace

std::vector<CompressorInfo> describe_compressors(const Backends& backends) {
  std::vector<CompressorInfo> out;
  for (auto kind : kAllCompressors) {
    CompressorInfo info{kind, backends.scorer != nullptr, "", common_parameters()};
    auto& p = info.parameters;
    switch (kind) {
      case CompressorKind::SelectiveContext:
        p["granularity"] = {{"type", "string"}, {"enum", {"token", "phrase", "sentence"}}, {"default", "phrase"}};
        break;
      case CompressorKind::Lingua:
      case CompressorKind::LongLingua:
        p["question"] = {{"type", "string"}, {"required", kind == CompressorKind::LongLingua}};
        p["instruction"] = {{"type", "string"}};
        p["include_question"] = {{"type", "boolean"}, {"default", false}};
        p["coarse_factor"] = {{"type", "number"}, {"default", 1.4}};
        p["segment_size"] = {{"type", "integer"}, {"default", 64}};
        break;
      case CompressorKind::SCRL:
        p["max_length"] = {{"type", "integer"},
                           {"required", false},
                           {"description", "context window; must not exceed the original token length"}};
        break;
      case CompressorKind::KiS:
        p["max_length"] = {{"type", "integer"},
                           {"required", false},
                           {"description", "maximum input length; must be at least the original token length"}};
        p["candidates"] = {{"type", "integer"}, {"default", 4}};
        p["temperature"] = {{"type", "number"}, {"default", 0.7}};
        if (!backends.generator) {
          info.available = false;
          info.reason = "no generation endpoint configured";
        }
        break;
    }
    if (!backends.scorer) info.reason = "no scorer backend configured";
    out.push_back(std::move(info));
  }
  return out;
}

CompressorOptions options_from_json(const nlohmann::json& params) {
  CompressorOptions opt;
  if (params.is_null()) return opt;
  if (!params.is_object()) throw ParameterError("params", "params must be an object");
  for (const auto& [key, value] : params.items()) {
    try {
      if (key == "granularity") {
        const auto g = parse_granularity(value.get<std::string>());
        if (!g) throw ParameterError("params.granularity", "granularity must be token, phrase or sentence");
        opt.granularity = *g;
      } else if (key == "instruction") {
        opt.instruction = value.get<std::string>();
      } else if (key == "instruction_floor") {
        opt.instruction_floor = value.get<double>();
      } else if (key == "include_question") {
        opt.include_question = value.get<bool>();
      } else if (key == "question_floor") {
        opt.question_floor = value.get<double>();
      } else if (key == "coarse_factor") {
        opt.coarse_factor = value.get<double>();
      } else if (key == "segment_size") {
        const auto size = value.get<std::int64_t>();
        if (size <= 0) throw ParameterError("params.segment_size", "segment_size must be positive");
        opt.segment_size = static_cast<std::size_t>(size);
      } else if (key == "candidates") {
        opt.candidates = value.get<int>();
      } else if (key == "temperature") {
        opt.temperature = value.get<double>();
      } else if (key == "fluency_weight") {
        opt.fluency_weight = value.get<double>();
      } else if (key == "salience_weight") {
        opt.salience_weight = value.get<double>();
      } else if (key == "simplicity_weight") {
        opt.simplicity_weight = value.get<double>();
      } else {
        throw ParameterError("params." + key, "unknown parameter '" + key + "'");
      }
    } catch (const nlohmann::json::exception&) {
      throw ParameterError("params." + key, "parameter '" + key + "' has the wrong type");
    }
  }
  return opt;
}

}  // namespace pct
