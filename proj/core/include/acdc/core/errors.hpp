#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace acdc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
  using Error::Error;
};

class OutOfRange : public Error {
public:
  using Error::Error;
};

/// Malformed or inconsistent experiment configuration. Line and column are
/// 1-based and zero when the problem is semantic rather than syntactic.
class ConfigError : public Error {
public:
  ConfigError(const std::string& what, std::size_t line = 0, std::size_t column = 0)
      : Error(what), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

private:
  std::size_t line_;
  std::size_t column_;
};

/// A stochastic or iterative update produced a non-finite value.
/// `step` is the inner index (DC step, ODE step, Adam step) where it happened,
/// `iteration` the outer solver iteration when known (-1 otherwise).
class DivergenceError : public Error {
public:
  DivergenceError(const std::string& what, long step, long iteration = -1)
      : Error(what), step_(step), iteration_(iteration) {}

  long step() const noexcept { return step_; }
  long iteration() const noexcept { return iteration_; }

private:
  long step_;
  long iteration_;
};

/// An inner linear solve did not reach its tolerance.
class ConvergenceError : public Error {
public:
  ConvergenceError(const std::string& what, int iterations, double residual)
      : Error(what), iterations_(iterations), residual_(residual) {}

  int iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

private:
  int iterations_;
  double residual_;
};

}  // namespace acdc
