#include "pct/runner/config.hpp"

#include <cstdlib>
#include <fstream>

#include "pct/compressors/toolkit.hpp"
#include "pct/core/errors.hpp"
#include "pct/datasets/registry.hpp"

namespace pct::runner {
namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

std::optional<net::EndpointConfig> endpoint(const nlohmann::json& j, const char* key,
                                            const std::filesystem::path& base) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  auto config = net::endpoint_from_json(j[key]);
  if (!config.cassette.empty()) config.cassette = resolve(base, config.cassette).string();
  return config;
}

nlohmann::json options_to_json(const CompressorOptions& o) {
  nlohmann::json j = {{"granularity", to_string(o.granularity)},
                      {"instruction_floor", o.instruction_floor},
                      {"include_question", o.include_question},
                      {"question_floor", o.question_floor},
                      {"coarse_factor", o.coarse_factor},
                      {"segment_size", o.segment_size},
                      {"candidates", o.candidates},
                      {"temperature", o.temperature},
                      {"fluency_weight", o.fluency_weight},
                      {"salience_weight", o.salience_weight},
                      {"simplicity_weight", o.simplicity_weight}};
  if (o.instruction) j["instruction"] = *o.instruction;
  return j;
}

nlohmann::json endpoint_echo(const std::optional<net::EndpointConfig>& e) {
  if (!e) return nullptr;
  auto j = net::to_json(*e);
  // Cassette paths differ between checkouts; keep reports portable.
  if (!e->cassette.empty()) j["cassette"] = std::filesystem::path(e->cassette).filename().string();
  return j;
}

void override_url(std::optional<net::EndpointConfig>& e, const char* var) {
  if (const char* v = std::getenv(var); v != nullptr && *v != '\0' && e) e->base_url = v;
}

void override_cassette(std::optional<net::EndpointConfig>& e, net::CassetteMode mode) {
  if (e && !e->cassette.empty()) e->cassette_mode = mode;
}

void override_key(std::optional<net::EndpointConfig>& e, const char* name) {
  if (e) e->api_key_env = name;
}

}  // namespace

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::IntrinsicReconstruction: return "intrinsic_reconstruction";
    case Mode::IntrinsicSummarization: return "intrinsic_summarization";
    case Mode::ExtrinsicAnswer: return "extrinsic_answer";
  }
  return "unknown";
}

std::optional<Mode> parse_mode(std::string_view name) {
  if (name == "intrinsic_reconstruction" || name == "reconstruction") return Mode::IntrinsicReconstruction;
  if (name == "intrinsic_summarization" || name == "summarization") return Mode::IntrinsicSummarization;
  if (name == "extrinsic_answer" || name == "extrinsic") return Mode::ExtrinsicAnswer;
  return std::nullopt;
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json scorer_j = {{"type", scorer.type},
                             {"order", scorer.order},
                             {"smoothing_k", scorer.smoothing_k},
                             {"cache_weight", scorer.cache_weight},
                             {"include_dataset", scorer.include_dataset},
                             {"remote", endpoint_echo(scorer.remote)}};
  auto corpus = nlohmann::json::array();
  for (const auto& p : scorer.corpus) corpus.push_back(p.filename().string());
  scorer_j["corpus"] = corpus;
  return {{"name", name},
          {"compressor", to_string(compressor)},
          {"params", options_to_json(options)},
          {"max_length", max_length ? nlohmann::json(*max_length) : nlohmann::json(nullptr)},
          {"dataset", dataset},
          {"metrics", metrics},
          {"ratios", ratios},
          {"mode", to_string(mode)},
          {"target_llm", endpoint_echo(target_llm)},
          {"llm_mode", llm_mode == LlmMode::Chat ? "chat" : "completion"},
          {"generator", endpoint_echo(generator)},
          {"embedder", endpoint_echo(embedder)},
          {"scorer", scorer_j},
          {"scrl_policy", scrl_policy ? nlohmann::json(scrl_policy->filename().string()) : nlohmann::json(nullptr)},
          {"seed", seed},
          {"concurrency", concurrency},
          {"row_timeout_ms", row_timeout_ms},
          {"limit", limit ? nlohmann::json(*limit) : nlohmann::json(nullptr)}};
}

ScorerConfig scorer_from_json(const nlohmann::json& s, const std::filesystem::path& base_dir) {
  ScorerConfig c;
  try {
    c.type = s.value("type", c.type);
    c.order = s.value("order", c.order);
    c.smoothing_k = s.value("smoothing_k", c.smoothing_k);
    c.cache_weight = s.value("cache_weight", c.cache_weight);
    c.include_dataset = s.value("include_dataset", c.include_dataset);
    if (s.contains("corpus")) {
      for (const auto& p : s["corpus"]) c.corpus.push_back(resolve(base_dir, p.get<std::string>()));
    }
    c.remote = endpoint(s, "remote", base_dir);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid scorer configuration: ") + e.what());
  }
  if (c.type != "remote" && c.type != "ngram") throw ConfigError("scorer type must be ngram or remote");
  return c;
}

std::optional<net::EndpointConfig> endpoint_from(const nlohmann::json& j, const char* key,
                                                 const std::filesystem::path& base_dir) {
  try {
    return endpoint(j, key, base_dir);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid endpoint '") + key + "': " + e.what());
  }
}

RunConfig run_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("a run configuration must be an object");
  RunConfig c;
  try {
    c.name = j.value("name", std::string{});
    const auto kind = parse_compressor(j.at("compressor").get<std::string>());
    if (!kind) throw ConfigError("unknown compressor '" + j.at("compressor").get<std::string>() + "'");
    c.compressor = *kind;
    if (j.contains("params")) {
      try {
        c.options = options_from_json(j["params"]);
      } catch (const ParameterError& e) {
        throw ConfigError(e.what());
      }
    }
    if (j.contains("max_length") && !j["max_length"].is_null()) c.max_length = j["max_length"].get<std::int64_t>();
    c.dataset = j.at("dataset").get<std::string>();
    c.metrics = j.at("metrics").get<std::vector<std::string>>();
    if (j.contains("ratio")) {
      const auto& r = j["ratio"];
      c.ratios = r.is_array() ? r.get<std::vector<double>>() : std::vector<double>{r.get<double>()};
    }
    if (j.contains("mode")) {
      const auto mode = parse_mode(j["mode"].get<std::string>());
      if (!mode) throw ConfigError("unknown mode '" + j["mode"].get<std::string>() + "'");
      c.mode = *mode;
    }
    c.target_llm = endpoint(j, "target_llm", base_dir);
    if (j.contains("llm_mode")) {
      const auto m = j["llm_mode"].get<std::string>();
      if (m != "chat" && m != "completion") throw ConfigError("llm_mode must be chat or completion");
      c.llm_mode = m == "chat" ? LlmMode::Chat : LlmMode::Completion;
    }
    c.generator = endpoint(j, "generator", base_dir);
    c.embedder = endpoint(j, "embedder", base_dir);
    if (j.contains("scorer")) c.scorer = scorer_from_json(j["scorer"], base_dir);
    if (j.contains("scrl_policy") && !j["scrl_policy"].is_null()) {
      c.scrl_policy = resolve(base_dir, j["scrl_policy"].get<std::string>());
    }
    if (j.contains("registry") && !j["registry"].is_null()) {
      c.registry = resolve(base_dir, j["registry"].get<std::string>());
    }
    c.seed = j.value("seed", c.seed);
    c.concurrency = j.value("concurrency", c.concurrency);
    c.row_timeout_ms = j.value("row_timeout_ms", c.row_timeout_ms);
    if (j.contains("limit") && !j["limit"].is_null()) c.limit = j["limit"].get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid run configuration: ") + e.what());
  }
  if (c.name.empty()) c.name = c.dataset + "-" + std::string(to_string(c.compressor));
  return c;
}

std::vector<RunConfig> load_eval_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file " + file.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file " + file.string() + " is not valid JSON: " + e.what());
  }
  const auto base = file.parent_path();
  std::vector<RunConfig> runs;
  if (j.contains("runs")) {
    const auto defaults = j.value("defaults", nlohmann::json::object());
    if (!j["runs"].is_array()) throw ConfigError("'runs' must be an array");
    for (const auto& run : j["runs"]) {
      auto merged = defaults;
      merged.merge_patch(run);
      runs.push_back(run_from_json(merged, base));
    }
  } else {
    runs.push_back(run_from_json(j, base));
  }
  for (auto& run : runs) apply_env_overrides(run);
  return runs;
}

void apply_env_overrides(RunConfig& config) {
  override_url(config.target_llm, "PCT_LLM_BASE_URL");
  override_url(config.generator, "PCT_GENERATOR_BASE_URL");
  override_url(config.embedder, "PCT_EMBEDDER_BASE_URL");
  override_url(config.scorer.remote, "PCT_SCORER_BASE_URL");
  if (const char* mode = std::getenv("PCT_CASSETTE_MODE"); mode != nullptr && *mode != '\0') {
    const auto parsed = net::parse_cassette_mode(mode);
    if (!parsed) throw ConfigError("PCT_CASSETTE_MODE must be one of off, record, replay");
    override_cassette(config.target_llm, *parsed);
    override_cassette(config.generator, *parsed);
    override_cassette(config.embedder, *parsed);
    override_cassette(config.scorer.remote, *parsed);
  }
  if (const char* key = std::getenv("PCT_API_KEY_ENV"); key != nullptr && *key != '\0') {
    override_key(config.target_llm, key);
    override_key(config.generator, key);
    override_key(config.embedder, key);
    override_key(config.scorer.remote, key);
  }
}

void validate(const RunConfig& config) {
  if (config.dataset.empty()) throw ConfigError("run '" + config.name + "' names no dataset");
  if (config.metrics.empty()) throw ConfigError("run '" + config.name + "' lists no metrics");
  if (config.ratios.empty()) throw ConfigError("run '" + config.name + "' lists no ratios");
  for (double r : config.ratios) {
    if (!(r >= 0.0 && r < 1.0)) throw ConfigError("ratio " + std::to_string(r) + " is outside [0, 1)");
  }
  if (config.concurrency < 1) throw ConfigError("concurrency must be positive");
  if (config.row_timeout_ms < 1) throw ConfigError("row_timeout_ms must be positive");
  for (const auto& m : config.metrics) {
    if (!datasets::is_known_metric(m)) throw ConfigError("unknown metric '" + m + "'");
    if (m == "accuracy" && config.mode != Mode::ExtrinsicAnswer) {
      throw ConfigError("metric 'accuracy' needs mode extrinsic_answer");
    }
  }
  if (config.mode == Mode::ExtrinsicAnswer && !config.target_llm) {
    throw ConfigError("mode extrinsic_answer requires a target_llm endpoint");
  }
  if (config.compressor == CompressorKind::KiS && !config.generator) {
    throw ConfigError("compressor KiS requires a generator endpoint");
  }
  if (config.scorer.type == "remote" && !config.scorer.remote) {
    throw ConfigError("scorer type remote requires scorer.remote");
  }
  if (config.scorer.type != "remote" && config.scorer.type != "ngram") {
    throw ConfigError("scorer type must be ngram or remote");
  }
  const std::optional<net::EndpointConfig>* endpoints[] = {&config.target_llm, &config.generator,
                                                           &config.embedder, &config.scorer.remote};
  for (const auto* e : endpoints) {
    if (*e) net::validate(**e);
  }
}

}  // namespace pct::runner
