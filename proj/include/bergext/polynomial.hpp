#pragma once

// Sparse polynomials used for weight factors, smooth weight parts and
// extension data.
//
// Holomorphic polynomials live in the variables (z1, z2) ("z" is an alias of
// z1 on the disk). Real polynomials live in (x1, y1, x2, y2) with z_k = x_k +
// i y_k ("x", "y" alias x1, y1). Both share one representation: a map from
// exponent tuples to complex coefficients.

#include <array>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "bergext/types.hpp"

namespace bergext {

class Poly {
 public:
  enum class Kind { holomorphic, real };
  using Exponents = std::array<int, 4>;

  Poly() = default;
  explicit Poly(Kind kind) : kind_(kind) {}

  static Poly constant(Complex c, Kind kind = Kind::holomorphic);
  /// The coordinate z_{index+1} (holomorphic) or x1, y1, x2, y2 (real).
  static Poly variable(int index, Kind kind = Kind::holomorphic);
  /// Sum c_n z_{var+1}^n.
  static Poly univariate(const std::vector<Complex>& coeffs, int var = 0);

  /// Parse "z1 - z2", "-6*x", "(z+1)^2", "0.5i*z2". Throws ParameterError.
  static Poly parse(std::string_view text, Kind kind = Kind::holomorphic);

  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] bool is_zero() const { return terms_.empty(); }
  [[nodiscard]] const std::map<Exponents, Complex>& terms() const { return terms_; }
  [[nodiscard]] int degree() const;
  /// Highest exponent of one variable.
  [[nodiscard]] int degree_in(int var) const;
  /// True if only variable `var` (or none) occurs.
  [[nodiscard]] bool depends_only_on(int var) const;
  /// True if some variable other than z1 / (x1, y1) occurs.
  [[nodiscard]] bool uses_second_factor() const;

  [[nodiscard]] Complex operator()(const Point& p) const;
  [[nodiscard]] Complex operator()(Complex z) const { return (*this)(Point{z, Complex{}}); }
  /// Real part of the value; for real-kind polynomials this is the value.
  [[nodiscard]] double real_value(const Point& p) const { return (*this)(p).real(); }

  [[nodiscard]] Poly derivative(int var) const;
  /// Laplacian in the real variables of the first or second factor (real kind).
  [[nodiscard]] Poly laplacian(int factor) const;
  /// Set variable `var` to zero.
  [[nodiscard]] Poly restrict_zero(int var) const;
  /// Exact division by z_{var+1}; throws DivergenceError if a term has
  /// exponent 0 in var with coefficient above `tol`.
  [[nodiscard]] Poly divide_by_variable(int var, double tol) const;
  /// Coefficient vector (c_0..c_deg) of a univariate polynomial in `var`.
  [[nodiscard]] std::vector<Complex> univariate_coeffs(int var) const;

  Poly& operator+=(const Poly& o);
  Poly& operator-=(const Poly& o);
  Poly& operator*=(Complex s);
  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator*(const Poly& a, const Poly& b);
  friend Poly operator*(Poly a, Complex s) { return a *= s; }

  [[nodiscard]] std::string to_string() const;

 private:
  void add_term(const Exponents& e, Complex c);

  Kind kind_ = Kind::holomorphic;
  std::map<Exponents, Complex> terms_;
};

}  // namespace bergext
