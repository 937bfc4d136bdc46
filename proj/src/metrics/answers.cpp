#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <regex>

#include "pct/core/errors.hpp"
#include "pct/core/tokenizer.hpp"
#include "pct/metrics/metrics.hpp"

namespace pct::metrics {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n\f\v");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n\f\v");
  return std::string(s.substr(first, last - first + 1));
}

std::string last_match(const std::string& text, const std::regex& re, int group = 0) {
  std::string found;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), re); it != std::sregex_iterator(); ++it) {
    found = (*it)[group].str();
  }
  return found;
}

std::string strip_commas(std::string s) {
  std::erase(s, ',');
  return s;
}

std::string last_number(const std::string& text) {
  static const std::regex number(R"(-?\d[\d,]*(?:\.\d+)?)");
  return strip_commas(last_match(text, number));
}

std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  std::string t = strip_commas(s);
  if (!t.empty() && t.front() == '$') t.erase(t.begin());
  if (t.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || !std::isfinite(v)) return std::nullopt;
  // Reject forms strtod accepts that are not plain numbers.
  for (char c : t) {
    if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '+')) return std::nullopt;
  }
  return v;
}

}  // namespace

std::optional<AnswerTask> parse_answer_task(std::string_view name) {
  const auto key = to_lower(name);
  if (key == "gsm8k" || key == "math") return AnswerTask::Gsm8k;
  if (key == "boolean" || key == "bool") return AnswerTask::Boolean;
  if (key == "multiple_choice" || key == "mc") return AnswerTask::MultipleChoice;
  if (key == "freeform") return AnswerTask::Freeform;
  return std::nullopt;
}

std::string extract_answer(std::string_view llm_output, AnswerTask task) {
  const std::string text(llm_output);
  switch (task) {
    case AnswerTask::Gsm8k: {
      const auto marker = text.rfind("####");
      if (marker != std::string::npos) {
        if (auto n = last_number(text.substr(marker + 4)); !n.empty()) return n;
      }
      return last_number(text);
    }
    case AnswerTask::Boolean: {
      static const std::regex boolean(R"(\b(true|false)\b)", std::regex::icase);
      const auto found = to_lower(last_match(text, boolean, 1));
      if (found == "true") return "True";
      if (found == "false") return "False";
      return {};
    }
    case AnswerTask::MultipleChoice: {
      static const std::regex choice(R"(\(([A-Za-z])\))");
      auto letter = last_match(text, choice, 1);
      for (char& c : letter) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      return letter;
    }
    case AnswerTask::Freeform:
      return trim(text);
  }
  return {};
}

std::string normalize_answer(std::string_view answer) {
  std::string collapsed;
  bool space = false;
  for (char c : trim(answer)) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = true;
      continue;
    }
    if (space && !collapsed.empty()) collapsed.push_back(' ');
    space = false;
    collapsed.push_back(c);
  }
  while (!collapsed.empty() && collapsed.back() == '.') collapsed.pop_back();
  if (auto v = parse_number(collapsed)) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.15g", *v == 0.0 ? 0.0 : *v);
    return buf;
  }
  return to_lower(collapsed);
}

MetricValue accuracy(std::span<const std::string> predictions, std::span<const std::string> golds) {
  if (predictions.size() != golds.size()) {
    throw ParameterError("predictions", "accuracy needs as many predictions as golds (" +
                                            std::to_string(predictions.size()) + " vs " +
                                            std::to_string(golds.size()) + ")");
  }
  MetricValue m{"accuracy"};
  if (predictions.empty()) {
    m.degenerate = true;
    return m;
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const auto p = normalize_answer(predictions[i]);
    if (!p.empty() && p == normalize_answer(golds[i])) ++correct;
  }
  m.value = static_cast<double>(correct) / static_cast<double>(predictions.size());
  m.components = {{"correct", static_cast<double>(correct)}, {"total", static_cast<double>(predictions.size())}};
  return m;
}

}  // namespace pct::metrics
