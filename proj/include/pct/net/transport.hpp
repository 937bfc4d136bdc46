#pragma once

#include <memory>
#include <optional>
#include <semaphore>
#include <string>

#include <json.hpp>

namespace pct::net {

struct HttpReply {
  int status = 0;
  std::string body;
  double latency_ms = 0.0;
};

// Moves one JSON POST to an endpoint. Implementations must be safe to call
// from several threads at once.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpReply post(const std::string& path, const std::string& body) const = 0;
  // Throws UpstreamError when the endpoint cannot be reached at all.
  virtual void probe() const = 0;
};

enum class CassetteMode { Off, Record, Replay };

std::optional<CassetteMode> parse_cassette_mode(const std::string& name);

// An OpenAI-compatible endpoint. The API key is read from the environment
// variable named by api_key_env at request time and is never persisted.
struct EndpointConfig {
  std::string base_url;
  std::string model;
  std::string api_key_env = "OPENAI_API_KEY";
  int timeout_ms = 30000;
  int max_retries = 2;
  int retry_backoff_ms = 200;
  int max_concurrency = 4;
  std::string cassette;
  CassetteMode cassette_mode = CassetteMode::Off;
};

void validate(const EndpointConfig& config);

// Reads an endpoint block: {base_url, model, api_key_env, timeout_ms,
// max_retries, retry_backoff_ms, max_concurrency, cassette, cassette_mode}.
EndpointConfig endpoint_from_json(const nlohmann::json& j);
nlohmann::json to_json(const EndpointConfig& config);

// Plain HTTP(S) transport backed by cpp-httplib.
class HttpTransport final : public Transport {
 public:
  explicit HttpTransport(EndpointConfig config);
  HttpReply post(const std::string& path, const std::string& body) const override;
  void probe() const override;

 private:
  EndpointConfig config_;
  std::string origin_;       // scheme://host[:port]
  std::string path_prefix_;  // e.g. "/v1"
};

// Builds the transport an endpoint config asks for: live HTTP, a recording
// wrapper around live HTTP, or a replay-only cassette.
std::shared_ptr<const Transport> make_transport(const EndpointConfig& config);

// Retry, backoff and concurrency policy over a transport. Retries on 429, 5xx
// and connection failures; every other status fails immediately.
class EndpointClient {
 public:
  EndpointClient(EndpointConfig config, std::shared_ptr<const Transport> transport);

  struct Reply {
    nlohmann::json body;
    double latency_ms = 0.0;
  };

  Reply post_json(const std::string& path, const nlohmann::json& body) const;
  const EndpointConfig& config() const noexcept { return config_; }
  void probe() const { transport_->probe(); }

 private:
  EndpointConfig config_;
  std::shared_ptr<const Transport> transport_;
  std::shared_ptr<std::counting_semaphore<>> slots_;
};

}  // namespace pct::net
