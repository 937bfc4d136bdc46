#include "pct/net/cassette.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unordered_map>

#include "pct/core/errors.hpp"

namespace pct::net {

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

namespace {

std::string canonical(const std::string& body) {
  try {
    return nlohmann::json::parse(body).dump();
  } catch (const nlohmann::json::exception&) {
    return body;
  }
}

nlohmann::json parse_or_string(const std::string& body) {
  try {
    return nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception&) {
    return body;
  }
}

}  // namespace

std::string Cassette::key(const std::string& path, const std::string& body) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(path + "\n" + canonical(body))));
  return buf;
}

Cassette::Cassette(std::string path) : path_(std::move(path)) {
  std::ifstream in(path_);
  if (!in) return;
  loaded_from_disk_ = true;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Entry entry;
      entry.path = j.at("path").get<std::string>();
      entry.request = j.at("request");
      entry.status = j.at("status").get<int>();
      const auto& response = j.at("response");
      entry.body = response.is_string() ? response.get<std::string>() : response.dump();
      entry.latency_ms = j.value("latency_ms", 0.0);
      entries_.emplace(j.at("key").get<std::string>(), std::move(entry));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("cassette " + path_ + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

Cassette::~Cassette() {
  try {
    flush();
  } catch (...) {
  }
}

std::shared_ptr<Cassette> Cassette::open(const std::string& path) {
  static std::mutex registry_mutex;
  static std::unordered_map<std::string, std::shared_ptr<Cassette>> registry;
  std::lock_guard lock(registry_mutex);
  const auto normal = std::filesystem::absolute(path).lexically_normal().string();
  auto& slot = registry[normal];
  if (!slot) slot = std::make_shared<Cassette>(path);
  return slot;
}

std::optional<Cassette::Entry> Cassette::find(const std::string& path, const std::string& body) const {
  std::lock_guard lock(mutex_);
  const auto it = entries_.find(key(path, body));
  if (it == entries_.end() || it->second.path != path) return std::nullopt;
  return it->second;
}

void Cassette::record(const std::string& path, const std::string& body, const HttpReply& reply) {
  Entry entry{path, parse_or_string(body), reply.status, reply.body, reply.latency_ms};
  std::lock_guard lock(mutex_);
  entries_.insert_or_assign(key(path, body), std::move(entry));
  dirty_ = true;
}

void Cassette::flush() {
  std::lock_guard lock(mutex_);
  if (!dirty_) return;
  const std::string tmp = path_ + ".tmp";
  std::ofstream out(tmp, std::ios::trunc);
  if (!out) throw Error("cannot write cassette " + tmp);
  for (const auto& [k, entry] : entries_) {
    nlohmann::json line = {{"key", k},
                           {"path", entry.path},
                           {"request", entry.request},
                           {"status", entry.status},
                           {"response", parse_or_string(entry.body)},
                           {"latency_ms", entry.latency_ms}};
    out << line.dump() << '\n';
  }
  out.close();
  if (!out) throw Error("failed writing cassette " + tmp);
  std::error_code ec;
  std::filesystem::rename(tmp, path_, ec);
  if (ec) throw Error("cannot replace cassette " + path_ + ": " + ec.message());
  dirty_ = false;
}

std::size_t Cassette::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

CassetteTransport::CassetteTransport(std::shared_ptr<Cassette> cassette, CassetteMode mode,
                                     std::shared_ptr<const Transport> inner)
    : cassette_(std::move(cassette)), mode_(mode), inner_(std::move(inner)) {
  if (!cassette_) throw ConfigError("cassette transport needs a cassette");
  if (mode_ == CassetteMode::Record && !inner_) {
    throw ConfigError("recording a cassette needs a live endpoint");
  }
}

HttpReply CassetteTransport::post(const std::string& path, const std::string& body) const {
  if (auto entry = cassette_->find(path, body)) {
    return {entry->status, entry->body, entry->latency_ms};
  }
  if (mode_ == CassetteMode::Replay) {
    throw UpstreamError(0, "cassette miss for " + path + " in " + cassette_->path());
  }
  auto reply = inner_->post(path, body);
  if (reply.status >= 200 && reply.status < 300) cassette_->record(path, body, reply);
  return reply;
}

void CassetteTransport::probe() const {
  if (mode_ == CassetteMode::Replay) {
    if (!cassette_->exists_on_disk()) {
      throw UpstreamError(0, "cassette " + cassette_->path() + " does not exist");
    }
    return;
  }
  inner_->probe();
}

}  // namespace pct::net
