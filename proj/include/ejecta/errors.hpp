#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace ejecta {

/// Base for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed user input (expressions, problem files). The CLI maps these to exit code 2.
class InputError : public Error {
 public:
  using Error::Error;
};

class SyntaxError : public InputError {
 public:
  SyntaxError(std::size_t position, std::string expected, const std::string& detail = {})
      : InputError("syntax error at position " + std::to_string(position) + ": expected " +
                   expected + (detail.empty() ? std::string{} : " (" + detail + ")")),
        position_(position),
        expected_(std::move(expected)) {}

  std::size_t position() const noexcept { return position_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  std::size_t position_;
  std::string expected_;
};

class UnsupportedError : public InputError {
 public:
  using InputError::InputError;
};

/// Numerical failures. The CLI maps these to exit code 1.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class EvalError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class UnboundVariable : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class BoundaryZero : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonConvergent : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SingularSystem : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegenerateForcing : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace ejecta
