#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pct {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A request or argument violates a documented parameter constraint.
class ParameterError : public Error {
 public:
  ParameterError(std::string field, const std::string& message)
      : Error(message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// A remote endpoint failed. status is the HTTP status, or 0 when no response
// was received (connection refused, timeout, cassette miss).
class UpstreamError : public Error {
 public:
  UpstreamError(int status, const std::string& message) : Error(message), status_(status) {}

  int status() const noexcept { return status_; }

 private:
  int status_;
};

class DatasetError : public Error {
 public:
  DatasetError(std::size_t line, const std::string& message)
      : Error(line == 0 ? message : "line " + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace pct
