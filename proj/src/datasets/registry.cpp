#include "pct/datasets/registry.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>

#include "pct/core/errors.hpp"
#include "pct/core/tokenizer.hpp"

#ifndef PCT_DEFAULT_DATA_DIR
#define PCT_DEFAULT_DATA_DIR "data"
#endif

namespace pct::datasets {

const std::vector<std::string>& known_metrics() {
  static const std::vector<std::string> names = {"accuracy", "bleu",     "rouge",     "rouge_1",
                                                 "rouge_2",  "rouge_l",  "token_f1",  "bertscore",
                                                 "edit_distance"};
  return names;
}

bool is_known_metric(const std::string& name) {
  const auto& names = known_metrics();
  return std::find(names.begin(), names.end(), name) != names.end();
}

std::vector<std::string> default_metrics(const std::string& dataset_name, Family family) {
  const auto name = to_lower(dataset_name);
  if (name == "gsm8k") return {"accuracy", "bleu", "rouge", "bertscore"};
  if (name == "bbh") return {"accuracy"};
  if (name == "gigaword" || name == "bnc" || name == "duc2004" || name == "broadcast" || name == "google") {
    return {"rouge", "token_f1"};
  }
  if (name == "bbc_news" || name == "arxiv" || name == "sharegpt") return {"bleu", "rouge", "bertscore"};
  if (name == "longbench") return {"accuracy", "bleu", "rouge", "bertscore", "edit_distance"};
  switch (family) {
    case Family::Gsm8k: return {"accuracy", "bleu", "rouge", "bertscore"};
    case Family::Bbh: return {"accuracy"};
    case Family::Summarization: return {"rouge", "token_f1"};
    case Family::Reconstruction: return {"bleu", "rouge", "bertscore"};
    case Family::LongBench: return {"accuracy", "bleu", "rouge", "bertscore", "edit_distance"};
  }
  return {};
}

std::vector<CompressorKind> default_compressors(const std::string& dataset_name) {
  if (to_lower(dataset_name) == "longbench") return {CompressorKind::Lingua, CompressorKind::LongLingua};
  return {std::begin(kAllCompressors), std::end(kAllCompressors)};
}

bool supports_metric(const DatasetManifest& manifest, const std::string& metric) {
  for (const auto& m : manifest.metrics) {
    if (m == metric) return true;
    if (m == "rouge" && metric.starts_with("rouge_")) return true;
  }
  return false;
}

bool supports_compressor(const DatasetManifest& manifest, CompressorKind kind) {
  return std::find(manifest.compressors.begin(), manifest.compressors.end(), kind) != manifest.compressors.end();
}

std::filesystem::path Registry::default_data_root() {
  if (const char* env = std::getenv("PCT_DATA_ROOT"); env != nullptr && *env != '\0') return env;
  return PCT_DEFAULT_DATA_DIR;
}

Registry Registry::load(const std::filesystem::path& file, std::optional<std::filesystem::path> data_root) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open dataset registry " + file.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("dataset registry " + file.string() + " is not valid JSON: " + e.what());
  }
  if (!data_root) {
    if (const char* env = std::getenv("PCT_DATA_ROOT"); env != nullptr && *env != '\0') {
      data_root = env;
    } else {
      data_root = file.parent_path();
    }
  }
  return from_json(j, *data_root);
}

Registry Registry::from_json(const nlohmann::json& j, const std::filesystem::path& data_root) {
  Registry registry;
  if (!j.is_object() || !j.contains("datasets") || !j["datasets"].is_array()) {
    throw ConfigError("dataset registry needs a 'datasets' array");
  }
  for (const auto& entry : j["datasets"]) {
    DatasetManifest m;
    try {
      m.name = entry.at("name").get<std::string>();
      const auto family = parse_family(entry.at("family").get<std::string>());
      if (!family) throw ConfigError("dataset '" + m.name + "' has an unknown family");
      m.family = *family;
      const auto task = parse_task(entry.at("task").get<std::string>());
      if (!task) throw ConfigError("dataset '" + m.name + "' has an unknown task");
      m.task = *task;
      std::filesystem::path path = entry.at("path").get<std::string>();
      m.path = path.is_absolute() ? path : data_root / path;
      if (entry.contains("fields")) m.fields = entry["fields"].get<std::map<std::string, std::string>>();
      m.metrics = entry.contains("metrics") ? entry["metrics"].get<std::vector<std::string>>()
                                            : default_metrics(m.name, m.family);
      for (const auto& metric : m.metrics) {
        if (!is_known_metric(metric)) throw ConfigError("dataset '" + m.name + "' lists unknown metric " + metric);
      }
      if (entry.contains("compressors")) {
        for (const auto& name : entry["compressors"]) {
          const auto kind = parse_compressor(name.get<std::string>());
          if (!kind) throw ConfigError("dataset '" + m.name + "' lists unknown compressor");
          m.compressors.push_back(*kind);
        }
      } else {
        m.compressors = default_compressors(m.name);
      }
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("invalid dataset registry entry: ") + e.what());
    }
    registry.add(std::move(m));
  }
  return registry;
}

Registry Registry::bundled() {
  const auto root = default_data_root();
  return load(root / "registry.json", root);
}

void Registry::add(DatasetManifest manifest) {
  if (contains(manifest.name)) throw ConfigError("duplicate dataset name '" + manifest.name + "'");
  manifests_.push_back(std::move(manifest));
}

const DatasetManifest& Registry::get(const std::string& name) const {
  for (const auto& m : manifests_) {
    if (m.name == name) return m;
  }
  throw ConfigError("unknown dataset '" + name + "'");
}

bool Registry::contains(const std::string& name) const {
  return std::any_of(manifests_.begin(), manifests_.end(), [&](const auto& m) { return m.name == name; });
}

}  // namespace pct::datasets
