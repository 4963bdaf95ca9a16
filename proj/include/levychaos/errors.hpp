#pragma once

#include <stdexcept>
#include <string>

namespace levychaos {

/// Argument outside the supported range (e.g. too many factors).
class BoundsError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Malformed scenario input or inconsistent model description.
class SchemaError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A required integral is infinite, or a square-integrability condition fails.
class DivergenceError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Quadrature failed to reach the requested tolerance.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Kernel shape the pathwise simulator cannot evaluate exactly.
class UnsupportedKernelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace levychaos
