#pragma once

#include <stdexcept>
#include <string>

namespace qotto {

// Base for every failure raised by the library. The CLI maps the concrete
// type onto its exit-code contract.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

// x = omega/T_eff diverges (population pinned at 0 or 1).
class DivergentRatio : public Error {
 public:
  using Error::Error;
};

// Effective temperature requested for a state that has none: nonzero
// coherence or population inversion.
class UndefinedTemperature : public Error {
 public:
  using Error::Error;
};

class DivergentRelativeEntropy : public Error {
 public:
  using Error::Error;
};

class NumericalFailure : public Error {
 public:
  NumericalFailure(const std::string& what, double error_estimate = 0.0)
      : Error(what), error_estimate_(error_estimate) {}
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double error_estimate_;
};

// The effective-temperature ratio never reaches the requested target
// within the integration horizon.
class NoCrossing : public Error {
 public:
  using Error::Error;
};

// Malformed or invalid configuration input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace qotto
