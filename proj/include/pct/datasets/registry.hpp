#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pct/datasets/dataset.hpp"

namespace pct::datasets {

// Metric names understood by the runner. "rouge" covers rouge_1, rouge_2 and
// rouge_l.
const std::vector<std::string>& known_metrics();
bool is_known_metric(const std::string& name);

// Supported metrics and compressors of the published dataset families, used
// when a manifest does not list its own.
std::vector<std::string> default_metrics(const std::string& dataset_name, Family family);
std::vector<CompressorKind> default_compressors(const std::string& dataset_name);

bool supports_metric(const DatasetManifest& manifest, const std::string& metric);
bool supports_compressor(const DatasetManifest& manifest, CompressorKind kind);

// Dataset name -> manifest, read from a JSON registry file:
//   {"datasets": [{"name", "family", "task", "path", "metrics"?, "compressors"?, "fields"?}]}
// Relative paths resolve against the data root: PCT_DATA_ROOT when set,
// otherwise the directory holding the registry file.
class Registry {
 public:
  static Registry load(const std::filesystem::path& file,
                       std::optional<std::filesystem::path> data_root = std::nullopt);
  static Registry from_json(const nlohmann::json& j, const std::filesystem::path& data_root);

  // The registry bundled with the toolkit (data/registry.json under the
  // built-in data directory or PCT_DATA_ROOT).
  static Registry bundled();
  static std::filesystem::path default_data_root();

  void add(DatasetManifest manifest);
  const DatasetManifest& get(const std::string& name) const;
  bool contains(const std::string& name) const;
  const std::vector<DatasetManifest>& manifests() const noexcept { return manifests_; }

 private:
  std::vector<DatasetManifest> manifests_;
};

}  // namespace pct::datasets
