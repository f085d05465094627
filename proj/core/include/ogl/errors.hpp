#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ogl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input vectors or matrices whose dimensions disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An invalid group covering. `group()` is the 0-based offending group, or -1
/// when the problem is global (e.g. the union misses a coordinate).
class CoveringError : public Error {
 public:
  CoveringError(const std::string& what, std::ptrdiff_t group)
      : Error(what), group_(group) {}
  std::ptrdiff_t group() const noexcept { return group_; }

 private:
  std::ptrdiff_t group_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Cholesky pivot was not strictly positive.
class FactorizationError : public Error {
 public:
  using Error::Error;
};

/// An iterative method ran out of iterations. Carries the last residual seen.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_residual)
      : Error(what), last_residual_(last_residual) {}
  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

/// Non-finite objective or iterate.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// A measure or operation that is undefined for the given input.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace ogl
