#pragma once

#include <stdexcept>
#include <string>

namespace dppal {

// Root of every error thrown by the library. Each subclass maps to one
// failure class so the CLI can translate it into an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad data handed to an operation (non-finite features, negative scores, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

// Hyperparameter outside its domain (sigma <= 0, k < 2, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// File or document that does not follow the expected format.
class ParseError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Enumeration or allocation that would exceed a hard size guard.
class CapacityError : public Error {
 public:
  using Error::Error;
};

class BudgetError : public Error {
 public:
  using Error::Error;
};

// Failures of the numerical machinery. The CLI reports all of them with the
// same exit code.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// The distribution puts zero mass on every admissible subset (rank < k).
class DegenerateError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Conditioning set has (numerically) zero probability under the DPP.
class SingularConditioningError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DivergenceError : public NumericalError {
 public:
  DivergenceError(const std::string& what, long iteration)
      : NumericalError(what + " (iteration " + std::to_string(iteration) + ")"),
        iteration_(iteration) {}

  long iteration() const { return iteration_; }

 private:
  long iteration_;
};

class InitializationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class UnsupportedExponentError : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

}  // namespace dppal
