#pragma once

#include <array>
#include <complex>
#include <stdexcept>
#include <string>

namespace bergext {

using Complex = std::complex<double>;

/// A point of the unit disk (only z[0] used) or of the unit bidisk.
using Point = std::array<Complex, 2>;

enum class Domain { disk, bidisk };

inline const char* to_string(Domain d) { return d == Domain::disk ? "disk" : "bidisk"; }

inline constexpr double kPi = 3.14159265358979323846;

// Error taxonomy. The CLI maps ParameterError to exit code 1 and
// DegeneracyError to exit code 2.

class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DegeneracyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite integrand value at a quadrature node.
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Derivative requested at a logarithmic pole of an unregularized weight.
class SingularPointError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Integral that fails the integrability probe or a removable-singularity check.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bergext
