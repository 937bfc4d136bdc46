#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pct/compressors/toolkit.hpp"
#include "pct/runner/config.hpp"

namespace httplib {
class Server;
}

namespace pct::service {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::vector<std::string> cors_origins{"*"};
  runner::ScorerConfig scorer;
  std::optional<net::EndpointConfig> generator;
  std::optional<std::filesystem::path> scrl_policy;
  std::filesystem::path data_root;  // bundled data when empty
};

// {host, port, cors_origins, scorer, generator, scrl_policy}; relative paths
// resolve against base_dir. Throws ConfigError.
ServiceConfig service_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
ServiceConfig load_service_config(const std::filesystem::path& file);

// Scorer fitted on the configured corpus, optional generator and SCRL policy.
Backends build_backends(const ServiceConfig& config);

struct Response {
  int status = 200;
  nlohmann::json body;
};

// Pure request handling: the HTTP server only moves bytes in and out.
//   POST /v1/compress     compress one prompt
//   GET  /v1/compressors  compressors, parameter schemas and availability
//   GET  /healthz         liveness
class Service {
 public:
  explicit Service(Backends backends) : backends_(std::move(backends)) {}

  Response handle(const std::string& method, const std::string& path, const std::string& body) const;

  Response compress(const std::string& body) const;
  Response compressors() const;
  Response health() const;

 private:
  Backends backends_;
};

// Blocking HTTP front end with CORS for the configured origins.
class HttpServer {
 public:
  HttpServer(std::shared_ptr<const Service> service, std::vector<std::string> cors_origins);
  ~HttpServer();

  // Binds to port (0 picks a free one) and returns the bound port.
  int bind(const std::string& host, int port);
  void listen();  // serves until stop()
  void stop();

 private:
  std::shared_ptr<const Service> service_;
  std::vector<std::string> origins_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace pct::service
