#pragma once

#include <stdexcept>
#include <string>

namespace kmsperturb {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (beta <= 0, negative order, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Input failed the Hermiticity check; carries the measured asymmetry
/// max_ij |A_ij - conj(A_ji)|.
class NonHermitianError : public Error {
 public:
  NonHermitianError(const std::string& what, double asymmetry)
      : Error(what), asymmetry_(asymmetry) {}
  double asymmetry() const noexcept { return asymmetry_; }

 private:
  double asymmetry_;
};

/// A spectral function was non-finite at an eigenvalue.
class DomainError : public Error {
 public:
  DomainError(const std::string& what, double eigenvalue)
      : Error(what), eigenvalue_(eigenvalue) {}
  double eigenvalue() const noexcept { return eigenvalue_; }

 private:
  double eigenvalue_;
};

/// An exponential would leave the double range; carries the offending exponent.
class OverflowError : public Error {
 public:
  OverflowError(const std::string& what, double exponent)
      : Error(what), exponent_(exponent) {}
  double exponent() const noexcept { return exponent_; }

 private:
  double exponent_;
};

/// Step halving did not reach the requested tolerance.
class IntegratorError : public Error {
 public:
  IntegratorError(const std::string& what, double last_distance)
      : Error(what), last_distance_(last_distance) {}
  double last_distance() const noexcept { return last_distance_; }

 private:
  double last_distance_;
};

/// The quadrature node budget cannot reach the requested tolerance.
class QuadratureBudgetError : public Error {
 public:
  QuadratureBudgetError(const std::string& what, double achieved)
      : Error(what), achieved_(achieved) {}
  double achieved_error() const noexcept { return achieved_; }

 private:
  double achieved_;
};

/// Malformed configuration; the message names the line or field.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace kmsperturb
