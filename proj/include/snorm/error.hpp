#pragma once

#include <stdexcept>
#include <string>

namespace snorm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand dimensions do not compose.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A norm used as a divisor vanished (zero matrix, zero row, ũ in the null space).
class ZeroMatrixError : public Error {
 public:
  using Error::Error;
};

/// The Jacobi oracle hit its sweep cap. Signals a degenerate input.
class OracleFailure : public Error {
 public:
  using Error::Error;
};

/// Argument outside the documented domain (negative clip constant, bad probabilities, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid experiment configuration. `field()` is a dotted path into the document.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

/// A file or directory could not be created, written or read.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace snorm
