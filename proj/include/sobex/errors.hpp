#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace sobex {

// Base for everything thrown by this library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad inputs detected before any heavy work starts. A message always names
// the offending parameter.
class ValidationError : public Error {
public:
  using Error::Error;
};

class InvalidParams : public ValidationError {
public:
  using ValidationError::ValidationError;
};

// Grid too coarse for the domain: empty interior, isolated nodes, or a
// disconnected interior mask.
class ResolutionTooCoarse : public ValidationError {
public:
  using ValidationError::ValidationError;
};

// Geometry that fails a structural requirement (self-intersecting polygon,
// annulus with a >= b, and so on).
class DomainError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

// Exponent outside the range a solver or formula supports.
class BadExponent : public ValidationError {
public:
  using ValidationError::ValidationError;
};

// Node index that is out of range or not interior where an interior node is
// required (puncture points, Dirac sources).
class BadNode : public ValidationError {
public:
  using ValidationError::ValidationError;
};

// Iteration budget exhausted. Carries a summary of the partial state so a
// caller can decide whether the run was nearly done.
class NoConvergence : public Error {
public:
  NoConvergence(const std::string& what, long iterations, double last_value,
                double last_residual, std::vector<double> trace = {})
      : Error(what),
        iterations(iterations),
        last_value(last_value),
        last_residual(last_residual),
        trace(std::move(trace)) {}

  long iterations = 0;
  double last_value = 0.0;
  double last_residual = 0.0;
  std::vector<double> trace;  // objective values of accepted steps, if any
};

// File system trouble (unreadable input, unwritable output, malformed JSON).
class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace sobex
