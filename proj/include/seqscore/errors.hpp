#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace seqscore {

/// Base for every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller passed a value that violates an operation's precondition.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A computation would exceed a configured resource budget.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent or unsupported configuration (e.g. SE requested on sample-free traces).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Metric cannot be evaluated on the given data.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// Malformed trace or result file. Carries the 1-based line and offending field.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::string field, const std::string& what)
      : Error(what + " at line " + std::to_string(line) +
              (field.empty() ? std::string() : " (field '" + field + "')")),
        line_(line),
        field_(std::move(field)) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

/// Entailment oracle could not be reached or answered with a non-2xx status.
class TransportError : public Error {
 public:
  enum class Kind { Unreachable, Timeout, HttpStatus };

  TransportError(Kind kind, const std::string& what, int status = 0)
      : Error(what), kind_(kind), status_(status) {}

  Kind kind() const noexcept { return kind_; }
  int status() const noexcept { return status_; }

 private:
  Kind kind_;
  int status_;
};

/// Entailment oracle replied, but the body does not match the wire schema.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

}  // namespace seqscore
