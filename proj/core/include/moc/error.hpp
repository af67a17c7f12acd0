#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace moc {

enum class ErrorKind {
  InvalidInput,
  NotPositiveDefinite,
  NotSymmetric,
  NumericOverflow,
  DimMismatch,
  ShapeError,
  InsufficientSamples,
  InvalidCoefficient,
  InvalidMargin,
  DegenerateEmbedding,
  InvalidStep,
  Diverged,
  MissingReference,
  ParseError,
  ConfigError,
  UsageError,
  IoError,
};

/// Stable identifier used in machine-readable error reports.
std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised when the optimizer produces a non-finite loss or parameter.
class DivergedError : public Error {
 public:
  DivergedError(int iteration, const std::string& message)
      : Error(ErrorKind::Diverged, message), iteration_(iteration) {}

  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

/// Raised by file loaders; carries the 1-based line number of the offending
/// line (0 when the problem is not tied to a line).
class ParseError : public Error {
 public:
  ParseError(int line, const std::string& message)
      : Error(ErrorKind::ParseError, message), line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace moc
