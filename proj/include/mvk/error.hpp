#pragma once

#include <stdexcept>
#include <string>

namespace mvk {

/// Failure classes; the numeric values double as CLI exit codes.
enum class ErrorKind : int {
  config = 2,
  numerical = 3,
  linear_algebra = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

class LinalgError : public Error {
 public:
  explicit LinalgError(const std::string& what) : Error(ErrorKind::linear_algebra, what) {}
};

void log_warning(const std::string& message);

}  // namespace mvk
