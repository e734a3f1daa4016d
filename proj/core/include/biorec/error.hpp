#pragma once

#include <stdexcept>
#include <string>

namespace biorec {

// Error categories map onto CLI exit codes: config 1, data 2, divergence 3.
enum class ErrorKind { config, data, training_divergence, format, invalid_argument };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class TrainingDivergence : public Error {
 public:
  explicit TrainingDivergence(const std::string& what)
      : Error(ErrorKind::training_divergence, what) {}
};

/// Bundle/record parsing failures: bad magic, version mismatch, checksum.
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error(ErrorKind::format, what) {}
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error(ErrorKind::invalid_argument, what) {}
};

/// Throws the subclass matching `kind` with the given message.
[[noreturn]] void throw_error(ErrorKind kind, const std::string& what);

}  // namespace biorec
