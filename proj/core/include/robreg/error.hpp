#pragma once

#include <stdexcept>
#include <string>

namespace robreg {

// Failure categories; the CLI maps them onto its exit codes.
enum class ErrorKind {
  kDomain,       // argument outside the mathematical domain of an operation
  kUsage,        // malformed configuration or command line
  kData,         // unreadable, malformed or degenerate input data
  kConvergence,  // an iterative fit did not produce a usable answer
  kIo,           // filesystem failure while writing outputs
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what)
      : Error(ErrorKind::kDomain, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what)
      : Error(ErrorKind::kUsage, what) {}
};

class ConvergenceError : public Error {
 public:
  explicit ConvergenceError(const std::string& what)
      : Error(ErrorKind::kConvergence, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

}  // namespace robreg
