#pragma once

#include <stdexcept>
#include <string>

namespace netreg {

/// Invalid input: bad arguments, malformed files, schema violations.
/// The CLI maps this family to exit code 2.
class ArgumentError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A scalar parameter outside its admissible interval.
class RangeError : public ArgumentError {
public:
  using ArgumentError::ArgumentError;
};

/// Malformed input file. `line()` is 1-based, 0 when not applicable.
class ParseError : public ArgumentError {
public:
  ParseError(const std::string& what, std::size_t line = 0)
      : ArgumentError(what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// File system failures (unreadable input, unwritable output).
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure: singular inputs, zero sparsity, non-convergence.
/// The CLI maps this family to exit code 3.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Regression design with no regressor variance (or too few points).
class DegenerateDesignError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// Two of the first l nodes of a localization graph are not connected.
class ConnectivityError : public NumericalError {
public:
  ConnectivityError(const std::string& what, int first, int second)
      : NumericalError(what), first_(first), second_(second) {}
  int first() const noexcept { return first_; }
  int second() const noexcept { return second_; }

private:
  int first_;
  int second_;
};

}  // namespace netreg
