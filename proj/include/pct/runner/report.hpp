#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace pct::runner {

struct ReportRow {
  std::string id;
  double achieved_ratio = 0.0;
  double latency_ms = 0.0;
  std::map<std::string, double> metrics;
  std::vector<std::string> skipped_metrics;  // e.g. bertscore without an embedder
  std::string compressed;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct RowSkip {
  std::string id;
  std::string reason;

  friend bool operator==(const RowSkip&, const RowSkip&) = default;
};

// Results at one compression ratio. rows.size() + skips.size() == dataset_size.
struct ReportSection {
  double ratio = 0.0;
  std::size_t dataset_size = 0;
  std::vector<ReportRow> rows;
  std::vector<RowSkip> skips;
  // Mean of every metric over the rows that carry it.
  std::map<std::string, double> means;
  std::optional<double> mean_achieved_ratio;  // unset when there are no rows

  bool empty() const noexcept { return rows.empty(); }

  friend bool operator==(const ReportSection&, const ReportSection&) = default;
};

struct EvalReport {
  nlohmann::json config;
  std::string toolkit_version;
  std::string timestamp;  // ISO 8601, UTC
  std::vector<ReportSection> sections;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

// Fills means and mean_achieved_ratio from the rows.
void compute_aggregates(ReportSection& section);

std::string utc_timestamp();

enum class ReportFormat { Json, Csv };

std::optional<ReportFormat> parse_report_format(std::string_view name);

nlohmann::json to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);

// JSON output has sorted keys and a trailing newline. CSV has a header, one
// line per row and one aggregate line per section (id "__mean__").
std::string render_report(const EvalReport& report, ReportFormat format);

// Throws Error naming the path on I/O failure.
void write_report(const EvalReport& report, ReportFormat format, const std::filesystem::path& path);
EvalReport read_report(const std::filesystem::path& path);

}  // namespace pct::runner
