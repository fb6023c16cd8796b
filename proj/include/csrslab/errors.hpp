#pragma once

#include <stdexcept>
#include <string>

namespace csrslab {

/// Argument outside the physical or validated range of a model.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed or non-finite input data (e.g. NaN model output, flat spectrum).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Quadrature or solver failed to reach the requested accuracy.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Observed count rate at or beyond the dead-time pole.
class SaturationError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Configuration document failed validation; `field()` holds the JSON path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace csrslab
