#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "pct/net/transport.hpp"

namespace pct::net {

// Recorded request/response pairs keyed by a hash of (path, canonical body).
// Stored as JSON lines sorted by key so re-recording identical traffic yields
// an identical file.
class Cassette {
 public:
  struct Entry {
    std::string path;
    nlohmann::json request;
    int status = 0;
    std::string body;
    double latency_ms = 0.0;
  };

  // Loads an existing file; a missing file gives an empty cassette.
  explicit Cassette(std::string path);
  ~Cassette();
  Cassette(const Cassette&) = delete;
  Cassette& operator=(const Cassette&) = delete;

  // Cassettes are shared per path and live until the process exits, so
  // several clients and successive runs see one set of entries. Paths are
  // compared after normalization.
  static std::shared_ptr<Cassette> open(const std::string& path);

  static std::string key(const std::string& path, const std::string& body);

  std::optional<Entry> find(const std::string& path, const std::string& body) const;
  void record(const std::string& path, const std::string& body, const HttpReply& reply);
  // Writes the entries, sorted by key, to a temporary file that then
  // replaces the cassette.
  void flush();
  std::size_t size() const;
  const std::string& path() const noexcept { return path_; }
  bool exists_on_disk() const noexcept { return loaded_from_disk_; }

 private:
  std::string path_;
  bool loaded_from_disk_ = false;
  mutable std::mutex mutex_;
  std::map<std::string, Entry> entries_;
  bool dirty_ = false;
};

class CassetteTransport final : public Transport {
 public:
  // inner is required in Record mode and ignored in Replay mode.
  CassetteTransport(std::shared_ptr<Cassette> cassette, CassetteMode mode,
                    std::shared_ptr<const Transport> inner);
  HttpReply post(const std::string& path, const std::string& body) const override;
  void probe() const override;

 private:
  std::shared_ptr<Cassette> cassette_;
  CassetteMode mode_;
  std::shared_ptr<const Transport> inner_;
};

std::uint64_t fnv1a64(const std::string& data);

}  // namespace pct::net
