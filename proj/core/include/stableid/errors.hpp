#pragma once

#include <stdexcept>
#include <string>

namespace stableid {

// Base class for every failure raised by this library. Subtypes exist so
// callers (and the CLI exit-code mapping) can distinguish usage mistakes
// from numerical breakdowns.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid argument values (non-positive delta, bad enum, ...).
class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

// Shape mismatch or non-square input where a square matrix is required.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Singular or numerically singular matrix (pivot below threshold).
class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

// A matrix required to be symmetric positive definite is not.
class NonSpdError : public Error {
 public:
  using Error::Error;
};

// Spectral radius at or above the stability boundary where a strictly
// stable matrix is required.
class UnstableInputError : public Error {
 public:
  using Error::Error;
};

// An iteration failed to converge within its sweep/iteration budget.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Eigenvector basis numerically singular; the matrix cannot be
// diagonalized at working precision.
class DefectiveMatrixError : public Error {
 public:
  using Error::Error;
};

// Regressor second-moment matrix not invertible; carries the offending
// minimum eigenvalue.
class SingularGramError : public Error {
 public:
  SingularGramError(const std::string& what, double min_eigenvalue)
      : Error(what), min_eigenvalue(min_eigenvalue) {}
  double min_eigenvalue;
};

// A structural identity that must hold for any correct solve was violated.
class StructureViolationError : public Error {
 public:
  using Error::Error;
};

// A quantity required to be monotone along a parameter sweep was not.
class MonotonicityViolationError : public Error {
 public:
  using Error::Error;
};

// Rejection sampling exhausted its oversampling budget.
class OversamplingError : public Error {
 public:
  using Error::Error;
};

// Malformed file contents or I/O failure.
class IoError : public Error {
 public:
  using Error::Error;
};

// Invalid experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace stableid
