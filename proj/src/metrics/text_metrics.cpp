#include <algorithm>
#include <cmath>
#include <map>

#include "pct/core/errors.hpp"
#include "pct/core/tokenizer.hpp"
#include "pct/metrics/metrics.hpp"

namespace pct::metrics {
namespace {

using Ngram = std::vector<std::string>;

std::map<Ngram, std::size_t> ngram_counts(const std::vector<std::string>& tokens, std::size_t n) {
  std::map<Ngram, std::size_t> counts;
  if (n == 0 || tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[Ngram(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                   tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

double f1(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

MetricValue overlap_f1(std::string name, const std::vector<std::string>& cand,
                       const std::vector<std::string>& ref, std::size_t n) {
  MetricValue m{std::move(name)};
  if (cand.empty() && ref.empty()) {
    m.value = 1.0;
    m.degenerate = true;
    m.components = {{"precision", 1.0}, {"recall", 1.0}, {"f1", 1.0}};
    return m;
  }
  const auto c = ngram_counts(cand, n);
  const auto r = ngram_counts(ref, n);
  std::size_t c_total = 0;
  std::size_t r_total = 0;
  std::size_t overlap = 0;
  for (const auto& [g, k] : c) c_total += k;
  for (const auto& [g, k] : r) {
    r_total += k;
    if (auto it = c.find(g); it != c.end()) overlap += std::min(k, it->second);
  }
  if (c_total == 0 && r_total == 0) {
    // Both too short for this order: fall back to exact token equality.
    m.degenerate = true;
    m.value = cand == ref ? 1.0 : 0.0;
    m.components = {{"precision", m.value}, {"recall", m.value}, {"f1", m.value}};
    return m;
  }
  const double p = c_total == 0 ? 0.0 : static_cast<double>(overlap) / static_cast<double>(c_total);
  const double rc = r_total == 0 ? 0.0 : static_cast<double>(overlap) / static_cast<double>(r_total);
  m.value = f1(p, rc);
  m.components = {{"precision", p}, {"recall", rc}, {"f1", m.value}};
  return m;
}

}  // namespace

MetricValue bleu(std::string_view candidate, std::span<const std::string> references, BleuOptions options) {
  if (references.empty()) throw ParameterError("references", "BLEU needs at least one reference");
  if (options.max_n < 1) throw ParameterError("max_n", "BLEU max_n must be at least 1");
  MetricValue m{"bleu"};
  const auto cand = tokenize(std::string(candidate)).tokens();
  if (cand.empty()) {
    m.note = "empty candidate";
    return m;
  }
  std::vector<std::vector<std::string>> refs;
  for (const auto& r : references) refs.push_back(tokenize(r).tokens());

  const std::size_t c = cand.size();
  std::size_t r = refs.front().size();
  for (const auto& ref : refs) {
    const auto diff = [c](std::size_t len) { return len > c ? len - c : c - len; };
    if (diff(ref.size()) < diff(r) || (diff(ref.size()) == diff(r) && ref.size() < r)) r = ref.size();
  }

  const std::size_t orders = std::min<std::size_t>(static_cast<std::size_t>(options.max_n), c);
  double log_sum = 0.0;
  bool zero = false;
  for (std::size_t n = 1; n <= orders; ++n) {
    const auto counts = ngram_counts(cand, n);
    std::map<Ngram, std::size_t> max_ref;
    for (const auto& ref : refs) {
      for (const auto& [g, k] : ngram_counts(ref, n)) max_ref[g] = std::max(max_ref[g], k);
    }
    std::size_t clipped = 0;
    std::size_t total = 0;
    for (const auto& [g, k] : counts) {
      total += k;
      if (auto it = max_ref.find(g); it != max_ref.end()) clipped += std::min(k, it->second);
    }
    double p = static_cast<double>(clipped) / static_cast<double>(total);
    if (options.smoothing && n > 1) {
      p = static_cast<double>(clipped + 1) / static_cast<double>(total + 1);
    }
    m.components["p" + std::to_string(n)] = p;
    if (p == 0.0) {
      zero = true;
    } else {
      log_sum += std::log(p);
    }
  }
  const double bp = c > r ? 1.0 : std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
  m.components["bp"] = bp;
  m.components["hyp_len"] = static_cast<double>(c);
  m.components["ref_len"] = static_cast<double>(r);
  m.value = zero ? 0.0 : bp * std::exp(log_sum / static_cast<double>(orders));
  return m;
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

MetricValue rouge(std::string_view candidate, std::string_view reference, RougeVariant variant) {
  const auto cand = tokenize(std::string(candidate)).tokens();
  const auto ref = tokenize(std::string(reference)).tokens();
  if (variant.kind == RougeVariant::Kind::N) {
    if (variant.n < 1) throw ParameterError("variant", "ROUGE-N needs n >= 1");
    return overlap_f1("rouge_" + std::to_string(variant.n), cand, ref, static_cast<std::size_t>(variant.n));
  }
  MetricValue m{"rouge_l"};
  if (cand.empty() && ref.empty()) {
    m.value = 1.0;
    m.degenerate = true;
    m.components = {{"precision", 1.0}, {"recall", 1.0}, {"f1", 1.0}};
    return m;
  }
  if (cand.empty() || ref.empty()) {
    m.components = {{"precision", 0.0}, {"recall", 0.0}, {"f1", 0.0}};
    return m;
  }
  const auto lcs = static_cast<double>(lcs_length(cand, ref));
  const double p = lcs / static_cast<double>(cand.size());
  const double r = lcs / static_cast<double>(ref.size());
  m.value = f1(p, r);
  m.components = {{"precision", p}, {"recall", r}, {"f1", m.value}, {"lcs", lcs}};
  return m;
}

MetricValue token_f1(std::string_view candidate, std::string_view reference) {
  return overlap_f1("token_f1", tokenize(std::string(candidate)).tokens(),
                    tokenize(std::string(reference)).tokens(), 1);
}

std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    int extra = 0;
    char32_t cp = c;
    if (c >= 0xF0 && c < 0xF8) {
      extra = 3;
      cp = c & 0x07;
    } else if (c >= 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if (c >= 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    }
    if (c >= 0x80 && c < 0xC0) extra = 0;  // stray continuation byte, keep as is
    bool ok = i + static_cast<std::size_t>(extra) < s.size();
    for (int k = 1; ok && k <= extra; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]);
      if ((cc & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (cc & 0x3F);
    }
    if (!ok) {
      cp = c;
      extra = 0;
    }
    out.push_back(cp);
    i += 1 + static_cast<std::size_t>(extra);
  }
  return out;
}

namespace {

template <typename T>
std::size_t levenshtein_impl(std::span<const T> a, std::span<const T> b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({up + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

}  // namespace

std::size_t levenshtein(std::span<const char32_t> a, std::span<const char32_t> b) {
  return levenshtein_impl(a, b);
}

std::size_t levenshtein(std::span<const std::string> a, std::span<const std::string> b) {
  return levenshtein_impl(a, b);
}

MetricValue edit_distance(std::string_view a, std::string_view b, EditUnit unit) {
  MetricValue m{"edit_distance"};
  std::size_t d = 0;
  std::size_t longest = 0;
  if (unit == EditUnit::Char) {
    const auto ua = decode_utf8(a);
    const auto ub = decode_utf8(b);
    d = levenshtein(std::span<const char32_t>(ua), std::span<const char32_t>(ub));
    longest = std::max(ua.size(), ub.size());
  } else {
    const auto ta = tokenize(std::string(a)).tokens();
    const auto tb = tokenize(std::string(b)).tokens();
    d = levenshtein(std::span<const std::string>(ta), std::span<const std::string>(tb));
    longest = std::max(ta.size(), tb.size());
  }
  m.value = static_cast<double>(d);
  m.degenerate = longest == 0;
  m.components["distance"] = static_cast<double>(d);
  m.components["similarity"] = longest == 0 ? 1.0 : 1.0 - static_cast<double>(d) / static_cast<double>(longest);
  return m;
}

}  // namespace pct::metrics
