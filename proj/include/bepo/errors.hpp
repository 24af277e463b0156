#pragma once

#include <cstddef>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace bepo {

namespace detail {
inline std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}
}  // namespace detail

// Base of everything the library throws on a contract violation.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidSpec : public Error {
 public:
  using Error::Error;
};

class OutOfRange : public Error {
 public:
  using Error::Error;
};

class AssumptionViolation : public Error {
 public:
  using Error::Error;
};

class DegenerateInput : public Error {
 public:
  using Error::Error;
};

class NegativeBand : public Error {
 public:
  using Error::Error;
};

class InvalidWidth : public Error {
 public:
  using Error::Error;
};

class NonFiniteState : public Error {
 public:
  NonFiniteState(std::size_t path, std::size_t step)
      : Error("non-finite state on path " + std::to_string(path) + " at step " +
              std::to_string(step) + " (time step too large?)"),
        path_(path),
        step_(step) {}
  std::size_t path() const { return path_; }
  std::size_t step() const { return step_; }

 private:
  std::size_t path_;
  std::size_t step_;
};

class NoConvergence : public Error {
 public:
  NoConvergence(std::size_t iterations, double residual)
      : Error("GMRES did not converge after " + std::to_string(iterations) +
              " iterations (relative residual " + detail::short_number(residual) + ")"),
        iterations_(iterations),
        residual_(residual) {}
  std::size_t iterations() const { return iterations_; }
  double residual() const { return residual_; }

 private:
  std::size_t iterations_;
  double residual_;
};

class PreconditionerBreakdown : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class DegenerateDifference : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& key, const std::string& what)
      : Error("line " + std::to_string(line) + (key.empty() ? "" : " (" + key + ")") +
              ": " + what),
        line_(line),
        key_(key) {}
  std::size_t line() const { return line_; }
  const std::string& key() const { return key_; }

 private:
  std::size_t line_;
  std::string key_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace bepo
