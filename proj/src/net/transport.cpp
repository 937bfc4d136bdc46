#include "pct/net/transport.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "pct/core/errors.hpp"
#include "pct/net/cassette.hpp"

namespace pct::net {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

void configure(httplib::Client& client, const EndpointConfig& config) {
  const auto timeout = std::chrono::milliseconds(config.timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
}

httplib::Headers auth_headers(const EndpointConfig& config) {
  httplib::Headers headers;
  if (!config.api_key_env.empty()) {
    if (const char* key = std::getenv(config.api_key_env.c_str()); key != nullptr && *key != '\0') {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }
  return headers;
}

bool retryable(int status) { return status == 0 || status == 429 || status >= 500; }

}  // namespace

std::optional<CassetteMode> parse_cassette_mode(const std::string& name) {
  if (name.empty() || name == "off") return CassetteMode::Off;
  if (name == "record") return CassetteMode::Record;
  if (name == "replay") return CassetteMode::Replay;
  return std::nullopt;
}

void validate(const EndpointConfig& config) {
  if (config.base_url.empty() && config.cassette_mode != CassetteMode::Replay) {
    throw ConfigError("endpoint base_url must not be empty");
  }
  if (config.timeout_ms <= 0) throw ConfigError("endpoint timeout_ms must be positive");
  if (config.max_retries < 0) throw ConfigError("endpoint max_retries must be non-negative");
  if (config.max_concurrency <= 0) throw ConfigError("endpoint max_concurrency must be positive");
  if (config.cassette_mode != CassetteMode::Off && config.cassette.empty()) {
    throw ConfigError("cassette_mode requires a cassette path");
  }
}

EndpointConfig endpoint_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("endpoint configuration must be an object");
  if (j.contains("api_key")) {
    throw ConfigError("endpoint configuration must not contain api_key; name an environment variable in api_key_env");
  }
  EndpointConfig config;
  try {
    config.base_url = j.value("base_url", config.base_url);
    config.model = j.value("model", config.model);
    config.api_key_env = j.value("api_key_env", config.api_key_env);
    config.timeout_ms = j.value("timeout_ms", config.timeout_ms);
    config.max_retries = j.value("max_retries", config.max_retries);
    config.retry_backoff_ms = j.value("retry_backoff_ms", config.retry_backoff_ms);
    config.max_concurrency = j.value("max_concurrency", config.max_concurrency);
    config.cassette = j.value("cassette", config.cassette);
    const auto mode = parse_cassette_mode(j.value("cassette_mode", std::string{}));
    if (!mode) throw ConfigError("cassette_mode must be one of off, record, replay");
    config.cassette_mode = *mode;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid endpoint configuration: ") + e.what());
  }
  return config;
}

nlohmann::json to_json(const EndpointConfig& config) {
  static constexpr const char* kModes[] = {"off", "record", "replay"};
  return {{"base_url", config.base_url},
          {"model", config.model},
          {"api_key_env", config.api_key_env},
          {"timeout_ms", config.timeout_ms},
          {"max_retries", config.max_retries},
          {"max_concurrency", config.max_concurrency},
          {"cassette", config.cassette},
          {"cassette_mode", kModes[static_cast<int>(config.cassette_mode)]}};
}

HttpTransport::HttpTransport(EndpointConfig config) : config_(std::move(config)) {
  const auto& url = config_.base_url;
  const auto scheme_end = url.find("://");
  const auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  const auto path_start = url.find('/', host_start);
  if (path_start == std::string::npos) {
    origin_ = url;
  } else {
    origin_ = url.substr(0, path_start);
    path_prefix_ = url.substr(path_start);
    while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
  }
  if (origin_.empty()) throw ConfigError("endpoint base_url has no host: " + url);
}

HttpReply HttpTransport::post(const std::string& path, const std::string& body) const {
  httplib::Client client(origin_);
  configure(client, config_);
  const auto started = Clock::now();
  auto result = client.Post(path_prefix_ + path, auth_headers(config_), body, "application/json");
  HttpReply reply;
  reply.latency_ms = elapsed_ms(started);
  if (!result) {
    reply.status = 0;
    reply.body = "transport error: " + httplib::to_string(result.error());
    return reply;
  }
  reply.status = result->status;
  reply.body = result->body;
  return reply;
}

void HttpTransport::probe() const {
  httplib::Client client(origin_);
  configure(client, config_);
  auto result = client.Get(path_prefix_ + "/models", auth_headers(config_));
  if (!result) {
    throw UpstreamError(0, "endpoint " + config_.base_url +
                               " is unreachable: " + httplib::to_string(result.error()));
  }
}

std::shared_ptr<const Transport> make_transport(const EndpointConfig& config) {
  validate(config);
  switch (config.cassette_mode) {
    case CassetteMode::Off:
      return std::make_shared<HttpTransport>(config);
    case CassetteMode::Record:
      return std::make_shared<CassetteTransport>(Cassette::open(config.cassette), CassetteMode::Record,
                                                 std::make_shared<HttpTransport>(config));
    case CassetteMode::Replay:
      return std::make_shared<CassetteTransport>(Cassette::open(config.cassette), CassetteMode::Replay,
                                                 nullptr);
  }
  throw ConfigError("unknown cassette mode");
}

EndpointClient::EndpointClient(EndpointConfig config, std::shared_ptr<const Transport> transport)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      slots_(std::make_shared<std::counting_semaphore<>>(config_.max_concurrency)) {
  if (!transport_) throw ConfigError("endpoint client needs a transport");
}

EndpointClient::Reply EndpointClient::post_json(const std::string& path,
                                                const nlohmann::json& body) const {
  const std::string payload = body.dump();
  HttpReply reply;
  double latency = 0.0;
  for (int attempt = 0;; ++attempt) {
    slots_->acquire();
    try {
      reply = transport_->post(path, payload);
    } catch (...) {
      slots_->release();
      throw;
    }
    slots_->release();
    latency += reply.latency_ms;
    if (reply.status >= 200 && reply.status < 300) break;
    if (!retryable(reply.status) || attempt >= config_.max_retries) {
      std::string detail = reply.body.size() > 300 ? reply.body.substr(0, 300) + "..." : reply.body;
      throw UpstreamError(reply.status, "endpoint " + config_.base_url + path + " returned status " +
                                            std::to_string(reply.status) + ": " + detail);
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(config_.retry_backoff_ms << attempt));
  }
  try {
    return {nlohmann::json::parse(reply.body), latency};
  } catch (const nlohmann::json::exception& e) {
    throw UpstreamError(reply.status, "endpoint " + config_.base_url + path +
                                          " returned malformed JSON: " + e.what());
  }
}

}  // namespace pct::net
