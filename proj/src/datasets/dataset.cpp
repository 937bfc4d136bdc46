#include "pct/datasets/dataset.hpp"

#include <fstream>

#include "pct/core/errors.hpp"
#include "pct/core/tokenizer.hpp"
#include "pct/metrics/metrics.hpp"

namespace pct::datasets {
namespace {

struct TaskName {
  Task task;
  const char* name;
};

constexpr TaskName kTasks[] = {
    {Task::Reconstruction, "reconstruction"}, {Task::Summarization, "summarization"},
    {Task::Qa, "qa"},                         {Task::Math, "math"},
    {Task::Boolean, "boolean"},               {Task::MultipleChoice, "multiple_choice"},
    {Task::Lies, "lies"},                     {Task::FewShot, "few_shot"},
    {Task::Synthetic, "synthetic"},           {Task::Code, "code"}};

struct FamilyName {
  Family family;
  const char* name;
};

constexpr FamilyName kFamilies[] = {{Family::Gsm8k, "gsm8k"},
                                    {Family::Bbh, "bbh"},
                                    {Family::Summarization, "summarization"},
                                    {Family::Reconstruction, "reconstruction"},
                                    {Family::LongBench, "longbench"}};

// Candidate JSON keys per canonical field, first present wins.
std::vector<std::string> family_keys(Family family, const std::string& field) {
  switch (family) {
    case Family::Gsm8k:
      if (field == "source") return {"question"};
      if (field == "answer") return {"answer"};
      break;
    case Family::Bbh:
      if (field == "source") return {"input"};
      if (field == "answer") return {"target"};
      break;
    case Family::Summarization:
      if (field == "source") return {"source", "text", "content", "document"};
      if (field == "reference") return {"summary", "reference", "compressed"};
      break;
    case Family::Reconstruction:
      if (field == "source") return {"text", "content", "prompt", "source"};
      if (field == "reference") return {"reference"};
      break;
    case Family::LongBench:
      if (field == "source") return {"context"};
      if (field == "question") return {"input"};
      if (field == "answer") return {"answers"};
      break;
  }
  if (field == "id") return {"id", "_id"};
  return {};
}

std::optional<std::string> as_text(const nlohmann::json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer()) return std::to_string(value.get<long long>());
  if (value.is_number()) return value.dump();
  if (value.is_boolean()) return value.get<bool>() ? "True" : "False";
  if (value.is_array() && !value.empty()) return as_text(value.front());
  return std::nullopt;
}

std::optional<std::string> lookup(const DatasetManifest& manifest, const nlohmann::json& row,
                                  const std::string& field) {
  std::vector<std::string> keys;
  if (auto it = manifest.fields.find(field); it != manifest.fields.end()) {
    keys = {it->second};
  } else {
    keys = family_keys(manifest.family, field);
  }
  for (const auto& key : keys) {
    if (auto it = row.find(key); it != row.end() && !it->is_null()) {
      if (auto text = as_text(*it)) return text;
    }
  }
  return std::nullopt;
}

std::string expected_key(const DatasetManifest& manifest, const std::string& field) {
  if (auto it = manifest.fields.find(field); it != manifest.fields.end()) return it->second;
  const auto keys = family_keys(manifest.family, field);
  std::string out;
  for (const auto& k : keys) out += (out.empty() ? "" : "|") + k;
  return out.empty() ? field : out;
}

std::string gold_answer(const std::string& raw, Family family, Task task) {
  if (family == Family::Gsm8k) return metrics::extract_answer(raw, metrics::AnswerTask::Gsm8k);
  if (task == Task::MultipleChoice) {
    if (auto letter = metrics::extract_answer(raw, metrics::AnswerTask::MultipleChoice); !letter.empty()) {
      return letter;
    }
  }
  if (task == Task::Boolean || task == Task::Lies) {
    if (auto b = metrics::extract_answer(raw, metrics::AnswerTask::Boolean); !b.empty()) return b;
  }
  return raw;
}

}  // namespace

std::string_view to_string(Task task) {
  for (const auto& t : kTasks) {
    if (t.task == task) return t.name;
  }
  return "unknown";
}

std::optional<Task> parse_task(std::string_view name) {
  const auto key = to_lower(name);
  for (const auto& t : kTasks) {
    if (key == t.name) return t.task;
  }
  return std::nullopt;
}

bool needs_answer(Task task) {
  return task == Task::Math || task == Task::Boolean || task == Task::MultipleChoice || task == Task::Lies;
}

std::string_view to_string(Family family) {
  for (const auto& f : kFamilies) {
    if (f.family == family) return f.name;
  }
  return "unknown";
}

std::optional<Family> parse_family(std::string_view name) {
  const auto key = to_lower(name);
  for (const auto& f : kFamilies) {
    if (key == f.name) return f.family;
  }
  return std::nullopt;
}

DatasetRecord map_record(const DatasetManifest& manifest, const nlohmann::json& row, std::size_t line_no) {
  if (!row.is_object()) throw DatasetError(line_no, "expected a JSON object");
  DatasetRecord record;
  record.task = manifest.task;
  record.id = lookup(manifest, row, "id")
                  .value_or(manifest.path.filename().string() + ":" + std::to_string(line_no));

  auto source = lookup(manifest, row, "source");
  if (!source || source->find_first_not_of(" \t\r\n") == std::string::npos) {
    throw DatasetError(line_no, "missing or empty field '" + expected_key(manifest, "source") + "'");
  }
  record.source = std::move(*source);
  record.question = lookup(manifest, row, "question");
  record.reference = lookup(manifest, row, "reference");
  if (auto raw = lookup(manifest, row, "answer")) {
    record.answer = gold_answer(*raw, manifest.family, manifest.task);
    if (manifest.family == Family::LongBench && !record.reference) record.reference = *raw;
  }

  if (needs_answer(record.task) && (!record.answer || record.answer->empty())) {
    throw DatasetError(line_no, "missing field '" + expected_key(manifest, "answer") + "' required for task " +
                                    std::string(to_string(record.task)));
  }
  if (record.task == Task::Summarization && !record.reference) {
    throw DatasetError(line_no, "missing field '" + expected_key(manifest, "reference") +
                                    "' required for task summarization");
  }
  return record;
}

std::vector<DatasetRecord> load_dataset(const DatasetManifest& manifest) {
  std::ifstream in(manifest.path);
  if (!in) throw DatasetError(0, "cannot open dataset file " + manifest.path.string());
  std::vector<DatasetRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json row;
    try {
      row = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DatasetError(line_no, std::string("malformed JSON in ") + manifest.path.filename().string() +
                                      ": " + e.what());
    }
    records.push_back(map_record(manifest, row, line_no));
  }
  if (records.empty()) throw DatasetError(0, "dataset file " + manifest.path.string() + " is empty");
  return records;
}

}  // namespace pct::datasets
