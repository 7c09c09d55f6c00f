#pragma once

#include <stdexcept>
#include <string>

namespace wcr {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain of an operation (bad theta, empty sample, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Adaptive quadrature gave up before reaching the requested tolerance.
class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, double estimate, double error_estimate)
      : Error(what), estimate_(estimate), error_estimate_(error_estimate) {}

  double estimate() const noexcept { return estimate_; }
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double estimate_;
  double error_estimate_;
};

/// A statistic or model violates the smoothness assumptions an operation needs
/// (undefined gradients, disagreeing derivative routes).
class RegularityError : public Error {
 public:
  using Error::Error;
};

}  // namespace wcr
