#pragma once

#include <stdexcept>
#include <string>

namespace mmm {

/// Invalid argument to a library operation (bad dimension, negative step, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A volatility or weight formula hit a zero denominator.
class SingularityError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Malformed or inconsistent observed data.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what, long line = -1)
      : std::runtime_error(what), line_(line) {}
  long line() const noexcept { return line_; }

 private:
  long line_;
};

class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterative solver failed to converge.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoSolutionError : public NumericError {
 public:
  using NumericError::NumericError;
};

class IntegrabilityError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Reading or writing a file failed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller violated a documented precondition of a data structure.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace mmm
