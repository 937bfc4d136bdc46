#include "pct/mock/mock_openai.hpp"

#include <cctype>
#include <cmath>
#include <random>
#include <sstream>

#include <httplib.h>

#include "pct/core/errors.hpp"
#include "pct/net/cassette.hpp"

namespace pct::mock {
namespace {

std::vector<std::string> words(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::string join(const std::vector<std::string>& ws, std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < std::min(n, ws.size()); ++i) {
    if (i) out += ' ';
    out += ws[i];
  }
  return out;
}

bool contains(const std::string& haystack, const char* needle) { return haystack.find(needle) != std::string::npos; }

std::string last_number(const std::string& text) {
  std::string last, cur;
  for (char c : text) {
    if (std::isdigit(static_cast<unsigned char>(c))) {
      cur += c;
    } else if (!cur.empty()) {
      last = cur;
      cur.clear();
    }
  }
  return cur.empty() ? (last.empty() ? "0" : last) : cur;
}

std::string answer(const std::string& system, const std::string& user) {
  if (contains(system, "####")) return "Let me work through it. #### " + last_number(user);
  if (contains(system, "True or False")) return words(user).size() % 2 == 0 ? "True" : "False";
  if (contains(system, "(A)")) return "The answer is (A).";
  return join(words(user), 5);
}

std::vector<std::string> rewrites(const std::string& user, int n, std::uint64_t seed) {
  const auto ws = words(user);
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) {
    std::mt19937_64 rng(seed * 1000003ULL + static_cast<std::uint64_t>(i));
    std::vector<std::string> kept;
    for (const auto& w : ws) {
      if (rng() % 10 < 6) kept.push_back(w);
    }
    if (kept.empty() && !ws.empty()) kept.push_back(ws.front());
    out.push_back(join(kept, kept.size()));
  }
  return out;
}

std::string chat_reply(const std::string& system, const std::string& user) {
  if (contains(system, "Reconstruct")) return user;
  if (contains(system, "Summarize")) return join(words(user), 12);
  return answer(system, user);
}

double piece_logprob(const std::string& piece) {
  return -(1.0 + static_cast<double>(net::fnv1a64(piece) % 1000) / 200.0);
}

nlohmann::json completion(const nlohmann::json& request) {
  const auto prompt = request.at("prompt").get<std::string>();
  if (!request.value("echo", false)) {
    const auto split = prompt.find("\n\n");
    const auto system = split == std::string::npos ? std::string{} : prompt.substr(0, split);
    const auto user = split == std::string::npos ? prompt : prompt.substr(split + 2);
    return {{"object", "text_completion"},
            {"choices", {{{"index", 0}, {"text", chat_reply(system, user)}, {"finish_reason", "stop"}}}}};
  }
  // Pieces: whitespace runs attach to the following word; words longer than
  // six bytes are cut into four-byte pieces.
  std::vector<std::string> pieces;
  std::vector<std::size_t> offsets;
  std::size_t i = 0;
  while (i < prompt.size()) {
    const std::size_t start = i;
    while (i < prompt.size() && std::isspace(static_cast<unsigned char>(prompt[i]))) ++i;
    const std::size_t word = i;
    while (i < prompt.size() && !std::isspace(static_cast<unsigned char>(prompt[i]))) ++i;
    if (i - word <= 6) {
      pieces.push_back(prompt.substr(start, i - start));
      offsets.push_back(start);
      continue;
    }
    pieces.push_back(prompt.substr(start, word - start + 4));
    offsets.push_back(start);
    for (std::size_t k = word + 4; k < i; k += 4) {
      pieces.push_back(prompt.substr(k, std::min<std::size_t>(4, i - k)));
      offsets.push_back(k);
    }
  }
  auto logprobs = nlohmann::json::array();
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    logprobs.push_back(k == 0 ? nlohmann::json(nullptr) : nlohmann::json(piece_logprob(pieces[k])));
  }
  return {{"object", "text_completion"},
          {"choices",
           {{{"index", 0},
             {"text", prompt},
             {"logprobs", {{"tokens", pieces}, {"token_logprobs", logprobs}, {"text_offset", offsets}}},
             {"finish_reason", "length"}}}}};
}

nlohmann::json chat(const nlohmann::json& request) {
  std::string system, user;
  for (const auto& m : request.at("messages")) {
    const auto role = m.at("role").get<std::string>();
    if (role == "system") system = m.at("content").get<std::string>();
    if (role == "user") user = m.at("content").get<std::string>();
  }
  std::vector<std::string> contents;
  const int n = request.value("n", 1);
  if (contains(system, "Rewrite")) {
    contents = rewrites(user, n, request.value("seed", std::uint64_t{0}));
  } else {
    contents.assign(static_cast<std::size_t>(n), chat_reply(system, user));
  }
  auto choices = nlohmann::json::array();
  for (std::size_t k = 0; k < contents.size(); ++k) {
    choices.push_back({{"index", k},
                       {"message", {{"role", "assistant"}, {"content", contents[k]}}},
                       {"finish_reason", "stop"}});
  }
  return {{"object", "chat.completion"}, {"choices", choices}};
}

std::vector<double> embedding(const std::string& text) {
  constexpr std::size_t kDim = 32;
  std::vector<double> v(kDim, 0.0);
  const std::string padded = "  " + text + "  ";
  for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
    v[net::fnv1a64(padded.substr(i, 3)) % kDim] += 1.0;
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

nlohmann::json embeddings(const nlohmann::json& request) {
  const auto& input = request.at("input");
  std::vector<std::string> texts =
      input.is_string() ? std::vector<std::string>{input.get<std::string>()} : input.get<std::vector<std::string>>();
  auto data = nlohmann::json::array();
  for (std::size_t k = 0; k < texts.size(); ++k) {
    data.push_back({{"object", "embedding"}, {"index", k}, {"embedding", embedding(texts[k])}});
  }
  return {{"object", "list"}, {"data", data}};
}

std::string strip_prefix(const std::string& path) { return path.rfind("/v1", 0) == 0 ? path.substr(3) : path; }

}  // namespace

nlohmann::json respond(const std::string& path, const nlohmann::json& request) {
  const auto p = strip_prefix(path);
  if (p == "/chat/completions") return chat(request);
  if (p == "/completions") return completion(request);
  if (p == "/embeddings") return embeddings(request);
  if (p == "/models") return {{"object", "list"}, {"data", {{{"id", "mock-1"}, {"object", "model"}}}}};
  throw Error("no mock route for " + path);
}

MockOpenAi::MockOpenAi() : server_(std::make_unique<httplib::Server>()) { install_routes(); }

MockOpenAi::~MockOpenAi() { stop(); }

void MockOpenAi::install_routes() {
  server_->Get("/v1/models", [](const httplib::Request& req, httplib::Response& res) {
    res.set_content(respond(req.path, nlohmann::json::object()).dump(), "application/json");
  });
  server_->Post(".*", [this](const httplib::Request& req, httplib::Response& res) {
    ++requests_;
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception&) {
      res.status = 400;
      res.set_content(R"({"error":{"message":"invalid JSON"}})", "application/json");
      return;
    }
    {
      std::lock_guard lock(mutex_);
      received_.push_back(body);
    }
    if (failures_left_.load() > 0 && failures_left_.fetch_sub(1) > 0) {
      res.status = failure_status_.load();
      res.set_content(R"({"error":{"message":"injected failure"}})", "application/json");
      return;
    }
    try {
      res.set_content(respond(req.path, body).dump(), "application/json");
    } catch (const std::exception& e) {
      res.status = 404;
      res.set_content(nlohmann::json({{"error", {{"message", e.what()}}}}).dump(), "application/json");
    }
  });
}

int MockOpenAi::start(const std::string& host, int port) {
  host_ = host;
  port_ = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (port_ < 0) throw Error("mock server cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

void MockOpenAi::listen(const std::string& host, int port) {
  host_ = host;
  port_ = port;
  if (!server_->listen(host, port)) throw Error("mock server cannot listen on " + host + ":" + std::to_string(port));
}

void MockOpenAi::stop() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::string MockOpenAi::base_url() const { return "http://" + host_ + ":" + std::to_string(port_) + "/v1"; }

void MockOpenAi::fail_next(int count, int status) {
  failure_status_ = status;
  failures_left_ = count;
}

std::vector<nlohmann::json> MockOpenAi::received() const {
  std::lock_guard lock(mutex_);
  return received_;
}

}  // namespace pct::mock
