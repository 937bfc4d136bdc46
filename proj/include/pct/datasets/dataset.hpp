#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pct/core/compression.hpp"

namespace pct::datasets {

enum class Task {
  Reconstruction,
  Summarization,
  Qa,
  Math,
  Boolean,
  MultipleChoice,
  Lies,
  FewShot,
  Synthetic,
  Code
};

std::string_view to_string(Task task);
std::optional<Task> parse_task(std::string_view name);

// Tasks whose records must carry a gold answer.
bool needs_answer(Task task);

// How a JSONL family maps onto DatasetRecord.
enum class Family { Gsm8k, Bbh, Summarization, Reconstruction, LongBench };

std::string_view to_string(Family family);
std::optional<Family> parse_family(std::string_view name);

// One evaluation item in the shape every runner consumes.
struct DatasetRecord {
  std::string id;
  std::string source;
  std::optional<std::string> question;
  std::optional<std::string> reference;
  std::optional<std::string> answer;
  Task task = Task::Reconstruction;

  friend bool operator==(const DatasetRecord&, const DatasetRecord&) = default;
};

struct DatasetManifest {
  std::string name;
  Task task = Task::Reconstruction;
  Family family = Family::Reconstruction;
  std::filesystem::path path;
  // Overrides of the family field mapping: canonical field -> JSON key.
  // Canonical fields are id, source, question, reference, answer.
  std::map<std::string, std::string> fields;
  std::vector<std::string> metrics;      // supported metric names
  std::vector<CompressorKind> compressors;  // supported compressors
};

// Parses a JSONL file into records, validating every line. Throws
// DatasetError naming the line and the missing field, or on an empty file.
std::vector<DatasetRecord> load_dataset(const DatasetManifest& manifest);

// Maps one parsed JSON line; line_no is 1-based and used for the fallback id
// "<file name>:<line>".
DatasetRecord map_record(const DatasetManifest& manifest, const nlohmann::json& row, std::size_t line_no);

}  // namespace pct::datasets
