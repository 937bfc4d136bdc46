#include "pct/runner/report.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include "pct/core/errors.hpp"

namespace pct::runner {
namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void compute_aggregates(ReportSection& section) {
  section.means.clear();
  section.mean_achieved_ratio.reset();
  if (section.rows.empty()) return;
  std::map<std::string, std::pair<double, std::size_t>> sums;
  double ratio_sum = 0.0;
  for (const auto& row : section.rows) {
    ratio_sum += row.achieved_ratio;
    for (const auto& [name, value] : row.metrics) {
      auto& [sum, n] = sums[name];
      sum += value;
      ++n;
    }
  }
  for (const auto& [name, acc] : sums) section.means[name] = acc.first / static_cast<double>(acc.second);
  section.mean_achieved_ratio = ratio_sum / static_cast<double>(section.rows.size());
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::optional<ReportFormat> parse_report_format(std::string_view name) {
  if (name == "json") return ReportFormat::Json;
  if (name == "csv") return ReportFormat::Csv;
  return std::nullopt;
}

nlohmann::json to_json(const EvalReport& report) {
  auto sections = nlohmann::json::array();
  for (const auto& s : report.sections) {
    auto rows = nlohmann::json::array();
    for (const auto& r : s.rows) {
      rows.push_back({{"id", r.id},
                      {"achieved_ratio", r.achieved_ratio},
                      {"latency_ms", r.latency_ms},
                      {"metrics", r.metrics},
                      {"skipped_metrics", r.skipped_metrics},
                      {"compressed", r.compressed}});
    }
    auto skips = nlohmann::json::array();
    for (const auto& k : s.skips) skips.push_back({{"id", k.id}, {"reason", k.reason}});
    nlohmann::json aggregates = {{"empty", s.empty()},
                                 {"row_count", s.rows.size()},
                                 {"skip_count", s.skips.size()},
                                 {"means", s.means},
                                 {"mean_achieved_ratio", nullptr}};
    if (s.mean_achieved_ratio) aggregates["mean_achieved_ratio"] = *s.mean_achieved_ratio;
    sections.push_back({{"ratio", s.ratio},
                        {"dataset_size", s.dataset_size},
                        {"rows", rows},
                        {"skips", skips},
                        {"aggregates", aggregates}});
  }
  return {{"config", report.config},
          {"toolkit_version", report.toolkit_version},
          {"timestamp", report.timestamp},
          {"sections", sections}};
}

EvalReport report_from_json(const nlohmann::json& j) {
  EvalReport report;
  try {
    report.config = j.at("config");
    report.toolkit_version = j.at("toolkit_version").get<std::string>();
    report.timestamp = j.at("timestamp").get<std::string>();
    for (const auto& sj : j.at("sections")) {
      ReportSection s;
      s.ratio = sj.at("ratio").get<double>();
      s.dataset_size = sj.at("dataset_size").get<std::size_t>();
      for (const auto& rj : sj.at("rows")) {
        ReportRow r;
        r.id = rj.at("id").get<std::string>();
        r.achieved_ratio = rj.at("achieved_ratio").get<double>();
        r.latency_ms = rj.at("latency_ms").get<double>();
        r.metrics = rj.at("metrics").get<std::map<std::string, double>>();
        r.skipped_metrics = rj.at("skipped_metrics").get<std::vector<std::string>>();
        r.compressed = rj.at("compressed").get<std::string>();
        s.rows.push_back(std::move(r));
      }
      for (const auto& kj : sj.at("skips")) {
        s.skips.push_back({kj.at("id").get<std::string>(), kj.at("reason").get<std::string>()});
      }
      const auto& agg = sj.at("aggregates");
      s.means = agg.at("means").get<std::map<std::string, double>>();
      if (!agg.at("mean_achieved_ratio").is_null()) s.mean_achieved_ratio = agg["mean_achieved_ratio"].get<double>();
      report.sections.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed report: ") + e.what());
  }
  return report;
}

std::string render_report(const EvalReport& report, ReportFormat format) {
  if (format == ReportFormat::Json) return to_json(report).dump(2) + "\n";

  std::set<std::string> names;
  for (const auto& s : report.sections) {
    for (const auto& r : s.rows) {
      for (const auto& [name, _] : r.metrics) names.insert(name);
    }
  }
  std::ostringstream out;
  out << "ratio,id,achieved_ratio,latency_ms";
  for (const auto& n : names) out << ',' << csv_field(n);
  out << '\n';
  for (const auto& s : report.sections) {
    for (const auto& r : s.rows) {
      out << number(s.ratio) << ',' << csv_field(r.id) << ',' << number(r.achieved_ratio) << ','
          << number(r.latency_ms);
      for (const auto& n : names) {
        out << ',';
        if (auto it = r.metrics.find(n); it != r.metrics.end()) out << number(it->second);
      }
      out << '\n';
    }
  }
  for (const auto& s : report.sections) {
    out << number(s.ratio) << ",__mean__,";
    if (s.empty()) {
      out << "empty,";
    } else {
      out << number(*s.mean_achieved_ratio) << ',';
    }
    for (const auto& n : names) {
      out << ',';
      if (auto it = s.means.find(n); it != s.means.end()) out << number(it->second);
    }
    out << '\n';
  }
  return out.str();
}

void write_report(const EvalReport& report, ReportFormat format, const std::filesystem::path& path) {
  const auto text = render_report(report, format);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
  out.close();
  if (!out) throw Error("failed writing " + path.string());
}

EvalReport read_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open report " + path.string());
  try {
    return report_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("report " + path.string() + " is not valid JSON: " + e.what());
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

}  // namespace pct::runner
