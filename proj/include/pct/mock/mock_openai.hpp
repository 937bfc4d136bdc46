#pragma once

#include <atomic>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

namespace httplib {
class Server;
}

namespace pct::mock {

// Deterministic stand-in for an OpenAI-compatible server, used to record
// cassettes and in tests. Every reply is a pure function of the request:
//   /chat/completions  reconstruct: echo; summarize: leading words;
//                      rewrite (n candidates): seeded word dropping;
//                      answer: a fixed rule per answer format
//   /completions       echo + logprobs over pseudo-subword pieces
//   /embeddings        hashed character-trigram vectors
//   GET /models        a one-model list
nlohmann::json respond(const std::string& path, const nlohmann::json& request);

class MockOpenAi {
 public:
  MockOpenAi();
  ~MockOpenAi();

  // Starts serving on a background thread; port 0 picks a free port.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  void listen(const std::string& host, int port);  // blocking
  void stop();

  std::string base_url() const;  // http://host:port/v1

  // The next `count` POSTs answer with `status` and an error body.
  void fail_next(int count, int status);
  std::size_t request_count() const { return requests_.load(); }
  std::vector<nlohmann::json> received() const;

 private:
  void install_routes();

  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::string host_;
  int port_ = 0;
  std::atomic<std::size_t> requests_{0};
  std::atomic<int> failures_left_{0};
  std::atomic<int> failure_status_{500};
  mutable std::mutex mutex_;
  std::vector<nlohmann::json> received_;
};

}  // namespace pct::mock
