#include "pct/service/service.hpp"

#include <fstream>

#include <httplib.h>

#include "pct/core/errors.hpp"
#include "pct/datasets/registry.hpp"
#include "pct/runner/runner.hpp"
#include "pct/version.hpp"

namespace pct::service {
namespace {

constexpr const char* kRequestKeys[] = {"text", "compressor", "ratio", "question", "max_length", "params", "seed"};

Response error(int status, const std::string& code, const std::string& message,
               const std::optional<std::string>& field = std::nullopt) {
  nlohmann::json body = {{"error", code}, {"message", message}, {"fields", nlohmann::json::object()}};
  if (field) body["fields"][*field] = message;
  return {status, body};
}

Response bad_field(const std::string& field, const std::string& message) {
  return error(400, "invalid_request", message, field);
}

std::string allowed_origin(const std::vector<std::string>& origins, const std::string& origin) {
  for (const auto& o : origins) {
    if (o == "*") return "*";
    if (o == origin) return origin;
  }
  return {};
}

}  // namespace

ServiceConfig service_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("service configuration must be an object");
  ServiceConfig c;
  try {
    c.host = j.value("host", c.host);
    c.port = j.value("port", c.port);
    if (j.contains("cors_origins")) c.cors_origins = j["cors_origins"].get<std::vector<std::string>>();
    if (j.contains("scorer")) c.scorer = runner::scorer_from_json(j["scorer"], base_dir);
    c.generator = runner::endpoint_from(j, "generator", base_dir);
    if (j.contains("scrl_policy") && !j["scrl_policy"].is_null()) {
      std::filesystem::path p = j["scrl_policy"].get<std::string>();
      c.scrl_policy = p.is_absolute() ? p : base_dir / p;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid service configuration: ") + e.what());
  }
  if (c.port < 0 || c.port > 65535) throw ConfigError("port must lie in [0, 65535]");
  if (c.generator) net::validate(*c.generator);
  return c;
}

ServiceConfig load_service_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file " + file.string());
  try {
    return service_config_from_json(nlohmann::json::parse(in), file.parent_path());
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config file " + file.string() + " is not valid JSON: " + e.what());
  }
}

Backends build_backends(const ServiceConfig& config) {
  Backends backends;
  const auto root = config.data_root.empty() ? datasets::Registry::default_data_root() : config.data_root;
  backends.scorer = runner::fit_scorer(config.scorer, root, {});
  if (config.generator) backends.generator = std::make_shared<ChatGenerator>(*config.generator);
  if (config.scrl_policy) {
    std::ifstream in(*config.scrl_policy);
    if (!in) throw ConfigError("cannot open SCRL policy " + config.scrl_policy->string());
    try {
      backends.scrl_policy = ScrlPolicy::from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("SCRL policy " + config.scrl_policy->string() + ": " + e.what());
    }
  }
  return backends;
}

Response Service::handle(const std::string& method, const std::string& path, const std::string& body) const {
  if (path == "/v1/compress") {
    if (method != "POST") return error(405, "method_not_allowed", "use POST " + path);
    return compress(body);
  }
  if (path == "/v1/compressors" || path == "/healthz") {
    if (method != "GET") return error(405, "method_not_allowed", "use GET " + path);
    return path == "/healthz" ? health() : compressors();
  }
  return error(404, "not_found", "no route for " + path);
}

Response Service::compress(const std::string& body) const {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    return error(400, "invalid_request", std::string("body is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) return error(400, "invalid_request", "body must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(std::begin(kRequestKeys), std::end(kRequestKeys), key) == std::end(kRequestKeys)) {
      return bad_field(key, "unknown field '" + key + "'");
    }
  }

  CompressionRequest request;
  if (!j.contains("text") || !j["text"].is_string()) return bad_field("text", "text must be a string");
  request.text = j["text"].get<std::string>();
  if (tokenize(request.text).empty()) return bad_field("text", "text must contain at least one token");

  if (!j.contains("compressor") || !j["compressor"].is_string()) {
    return bad_field("compressor", "compressor must be a string");
  }
  const auto name = j["compressor"].get<std::string>();
  const auto kind = parse_compressor(name);
  if (!kind) return error(422, "unsupported_compressor", "unsupported compressor '" + name + "'", "compressor");
  request.compressor = *kind;

  if (!j.contains("ratio") || !j["ratio"].is_number()) return bad_field("ratio", "ratio must be a number");
  request.ratio = j["ratio"].get<double>();

  if (j.contains("question") && !j["question"].is_null()) {
    if (!j["question"].is_string()) return bad_field("question", "question must be a string");
    request.question = j["question"].get<std::string>();
  }
  if (j.contains("max_length") && !j["max_length"].is_null()) {
    if (!j["max_length"].is_number_integer()) return bad_field("max_length", "max_length must be an integer");
    request.max_length = j["max_length"].get<std::int64_t>();
  }
  if (j.contains("seed") && !j["seed"].is_null()) {
    if (!j["seed"].is_number_unsigned()) return bad_field("seed", "seed must be a non-negative integer");
    request.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("params") && !j["params"].is_null()) {
    if (!j["params"].is_object()) return bad_field("params", "params must be an object");
    try {
      request.options = options_from_json(j["params"]);
    } catch (const ParameterError& e) {
      return bad_field(e.field(), e.what());
    }
  }

  try {
    const auto result = pct::compress(request, backends_);
    auto trace = nlohmann::json::array();
    for (const auto& t : result.trace) trace.push_back({{"token", t.token}, {"score", t.score}, {"kept", t.kept}});
    return {200,
            {{"compressed", result.compressed},
             {"original_len", result.original_len},
             {"compressed_len", result.compressed_len},
             {"achieved_ratio", result.achieved_ratio},
             {"trace", trace},
             {"notes", result.notes}}};
  } catch (const ParameterError& e) {
    return bad_field(e.field(), e.what());
  } catch (const ConfigError& e) {
    return error(422, "compressor_unavailable", e.what(), "compressor");
  } catch (const UpstreamError& e) {
    auto r = error(502, "upstream_error", e.what());
    r.body["upstream_status"] = e.status();
    return r;
  }
}

Response Service::compressors() const {
  auto list = nlohmann::json::array();
  for (const auto& info : describe_compressors(backends_)) {
    nlohmann::json entry = {{"name", to_string(info.kind)},
                            {"available", info.available},
                            {"extractive", is_extractive(info.kind)},
                            {"parameters", info.parameters}};
    if (!info.reason.empty()) entry["reason"] = info.reason;
    list.push_back(entry);
  }
  return {200, {{"compressors", list}}};
}

Response Service::health() const {
  return {200,
          {{"status", "ok"},
           {"version", kToolkitVersion},
           {"scorer", backends_.scorer ? backends_.scorer->describe() : std::string("none")}}};
}

HttpServer::HttpServer(std::shared_ptr<const Service> service, std::vector<std::string> cors_origins)
    : service_(std::move(service)), origins_(std::move(cors_origins)), server_(std::make_unique<httplib::Server>()) {
  auto cors = [this](const httplib::Request& req, httplib::Response& res) {
    const auto origin = allowed_origin(origins_, req.get_header_value("Origin"));
    if (origin.empty()) return;
    res.set_header("Access-Control-Allow-Origin", origin);
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    if (origin != "*") res.set_header("Vary", "Origin");
  };
  auto route = [this, cors](const httplib::Request& req, httplib::Response& res) {
    const auto out = service_->handle(req.method, req.path, req.body);
    cors(req, res);
    res.status = out.status;
    res.set_content(out.body.dump(), "application/json");
  };
  server_->Get(".*", route);
  server_->Post(".*", route);
  server_->Options(".*", [cors](const httplib::Request& req, httplib::Response& res) {
    cors(req, res);
    res.status = 204;
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = server_->bind_to_any_port(host);
    if (bound < 0) throw Error("cannot bind " + host);
    return bound;
  }
  if (!server_->bind_to_port(host, port)) throw Error("cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void HttpServer::listen() { server_->listen_after_bind(); }

void HttpServer::stop() {
  if (server_) server_->stop();
}

}  // namespace pct::service
