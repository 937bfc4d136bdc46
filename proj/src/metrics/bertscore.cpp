#include <algorithm>
#include <cmath>

#include "pct/core/errors.hpp"
#include "pct/core/tokenizer.hpp"
#include "pct/metrics/metrics.hpp"
#include "pct/metrics/remote_embedder.hpp"

namespace pct::metrics {

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) return 0.0;
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

MetricValue bertscore(std::string_view candidate, std::string_view reference, const Embedder* embedder) {
  MetricValue m{"bertscore"};
  if (embedder == nullptr) {
    m.skipped = true;
    m.note = "no embedding endpoint configured";
    return m;
  }
  const auto cand = tokenize(std::string(candidate)).tokens();
  const auto ref = tokenize(std::string(reference)).tokens();
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

  std::vector<std::vector<double>> ce;
  std::vector<std::vector<double>> re;
  try {
    ce = embedder->embed(cand);
    re = embedder->embed(ref);
  } catch (const UpstreamError& e) {
    m.skipped = true;
    m.note = e.what();
    return m;
  }
  if (ce.size() != cand.size() || re.size() != ref.size()) {
    m.skipped = true;
    m.note = "embedding endpoint returned the wrong number of vectors";
    return m;
  }

  std::vector<double> best_for_cand(cand.size(), -1.0);
  std::vector<double> best_for_ref(ref.size(), -1.0);
  for (std::size_t i = 0; i < cand.size(); ++i) {
    for (std::size_t j = 0; j < ref.size(); ++j) {
      const double s = cand[i] == ref[j] && ce[i] == re[j] ? 1.0 : cosine(ce[i], re[j]);
      best_for_cand[i] = std::max(best_for_cand[i], s);
      best_for_ref[j] = std::max(best_for_ref[j], s);
    }
  }
  double p = 0.0;
  double r = 0.0;
  for (double s : best_for_cand) p += s;
  for (double s : best_for_ref) r += s;
  p /= static_cast<double>(cand.size());
  r /= static_cast<double>(ref.size());
  const double f = p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
  m.value = f;
  m.components = {{"precision", p}, {"recall", r}, {"f1", f}};
  return m;
}

RemoteEmbedder::RemoteEmbedder(net::EndpointConfig config)
    : RemoteEmbedder(config, net::make_transport(config)) {}

RemoteEmbedder::RemoteEmbedder(net::EndpointConfig config, std::shared_ptr<const net::Transport> transport)
    : client_(std::move(config), std::move(transport)) {}

std::vector<std::vector<double>> RemoteEmbedder::embed(std::span<const std::string> texts) const {
  const nlohmann::json body = {{"model", client_.config().model},
                               {"input", std::vector<std::string>(texts.begin(), texts.end())}};
  const auto reply = client_.post_json("/embeddings", body);
  std::vector<std::vector<double>> out(texts.size());
  try {
    const auto& data = reply.body.at("data");
    for (std::size_t k = 0; k < data.size(); ++k) {
      const auto index = data[k].value("index", k);
      if (index >= out.size()) throw UpstreamError(200, "embedding index out of range");
      out[index] = data[k].at("embedding").get<std::vector<double>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw UpstreamError(200, std::string("embedding endpoint returned an unusable payload: ") + e.what());
  }
  return out;
}

}  // namespace pct::metrics
