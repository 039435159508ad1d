#pragma once

#include <stdexcept>
#include <string>

namespace lpdist {

// Argument outside a function's mathematical domain (wrong sign, exponent
// out of range, point outside the MGF domain, ...).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// An iteration (continued fraction, Newton solve, quadrature refinement)
// failed to reach its target accuracy within its budget.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, long iterations, double residual)
      : std::runtime_error(what), iterations(iterations), residual(residual) {}
  long iterations;
  double residual;
};

// A request exceeds the configured sampling budget.
class ResourceError : public std::runtime_error {
 public:
  explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

// Bad command line or config value; the CLI maps this to exit code 2.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

// The request is mathematically meaningful but outside what this tool
// implements (e.g. rate functions below p = 2).
class UnsupportedError : public DomainError {
 public:
  explicit UnsupportedError(const std::string& what) : DomainError(what) {}
};

}  // namespace lpdist
