#pragma once

// Weights phi on the disk and bidisk, their regularizations, twisted
// derivatives and cut-off families.
//
// A structured weight is phi = sum_j r_j log|f_j|^2 + psi with polynomial
// f_j and a smooth part psi given as a real polynomial in (x1, y1, x2, y2)
// plus an optional closed form. Weights are immutable values; copies share
// their representation.

#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bergext/polynomial.hpp"
#include "bergext/quadrature.hpp"
#include "bergext/types.hpp"

namespace bergext {

/// phi(z), or -infinity with `singular` set on the zero set of a log factor.
struct WeightValue {
  double value = 0.0;
  bool singular = false;
};

struct LogTerm {
  double r = 0.0;  ///< coefficient, >= 0
  Poly f;          ///< holomorphic singular factor
};

enum class SmoothForm {
  none,
  fubini_study,  ///< log(1 + |z1|^2 + |z2|^2)
};

enum class Regularization {
  convolution,  ///< mean of log|zeta|^2 over the disk of radius eps
  additive,     ///< log(eps^2 + |zeta|^2)
};

/// Regularization of log|zeta|^2 for a linear form zeta.
///
/// convolution: phi_eps = (|zeta|^2 - eps^2)/eps^2 + log eps^2 for |zeta| < eps
/// and log|zeta|^2 otherwise; decreases to log|zeta|^2 as eps -> 0.
struct RegularizedLogWeight {
  double epsilon = 0.1;
  Poly direction;  ///< zeta, e.g. z1 - z2
  Regularization kind = Regularization::convolution;
};

class WeightImpl;

class Weight {
 public:
  /// phi = 0 on the given domain.
  explicit Weight(Domain domain = Domain::disk);

  static Weight structured(Domain domain, std::vector<LogTerm> log_terms, Poly smooth,
                           SmoothForm form = SmoothForm::none, bool subharmonic = true);
  static Weight regularized(Domain domain, RegularizedLogWeight reg);
  /// -2m Re z on the disk.
  static Weight linear_re(double m);

  [[nodiscard]] Domain domain() const;
  [[nodiscard]] WeightValue evaluate(const Point& p) const;
  [[nodiscard]] double value(const Point& p) const { return evaluate(p).value; }
  /// e^{-phi}; +infinity at a singular point.
  [[nodiscard]] double density(const Point& p) const;
  /// (d phi/dz1, d phi/dz2). Throws SingularPointError at a log pole.
  [[nodiscard]] std::array<Complex, 2> dz(const Point& p) const;
  [[nodiscard]] bool flagged_subharmonic() const;
  [[nodiscard]] std::string describe() const;
  [[nodiscard]] nlohmann::json to_json() const;
  static Weight from_json(const nlohmann::json& j);

  /// Implementation handle, for composite weights.
  [[nodiscard]] const std::shared_ptr<const WeightImpl>& impl() const { return impl_; }
  explicit Weight(std::shared_ptr<const WeightImpl> impl) : impl_(std::move(impl)) {}

 private:
  std::shared_ptr<const WeightImpl> impl_;
};

class WeightImpl {
 public:
  virtual ~WeightImpl() = default;
  [[nodiscard]] virtual Domain domain() const = 0;
  [[nodiscard]] virtual WeightValue evaluate(const Point& p) const = 0;
  [[nodiscard]] virtual std::array<Complex, 2> dz(const Point& p) const = 0;
  [[nodiscard]] virtual bool subharmonic() const = 0;
  [[nodiscard]] virtual std::string describe() const = 0;
  [[nodiscard]] virtual nlohmann::json to_json() const = 0;
};

WeightValue eval_weight(const Weight& w, const Point& p);
inline WeightValue eval_weight(const Weight& w, Complex z) { return eval_weight(w, Point{z, Complex{}}); }

/// psi = max(phi + eps_coeff * log|z|^2, -floor), |z|^2 = |z1|^2 + |z2|^2.
Weight clamp_max(const Weight& w, double eps_coeff, double floor);

/// Radius below which clamp_max(-2m Re z, eps_coeff, floor) is identically
/// -floor: the largest r with 2m r + eps_coeff log r^2 <= -floor.
double clamp_plateau_radius(double m, double eps_coeff, double floor);

/// d f/dz_var - f * d phi/dz_var at p.
Complex twisted_derivative(const Weight& w, const Poly& f, const Point& p, int var = 0);

/// Minimum of the discrete Laplacian of phi over an n x n grid of points
/// inside the disk (radius 0.95), skipping singular points. The stencil is the
/// five-point one with its four neighbours replaced by 16 points on the circle
/// of radius h, which is exact on harmonic terms up to O((h/r)^16) at distance
/// r from a log pole. On the bidisk the Laplacian is taken in each factor with
/// the other coordinate held at a fixed slice value.
double sampled_min_laplacian(const Weight& w, int grid = 50, double h = 1e-3);

// Cut-off families.

enum class CutoffKind { rho_eps, xi_eps };

struct CutoffFamily {
  CutoffKind kind = CutoffKind::rho_eps;
  double epsilon = 0.5;
  Poly section = Poly::variable(0);  ///< s_Y or s_W
  double section_scale = 1.0;        ///< s is replaced by section_scale * s
};

/// The plateau profile: 1 on [0,1], 1 - 3(t-1)^2 + 2(t-1)^3 on [1,2], 0 after.
double cutoff_profile(double t);
double cutoff_profile_derivative(double t);

struct CutoffValue {
  double value = 1.0;
  std::array<Complex, 2> dz{};  ///< d/dz_k of the value
};

/// rho_eps = rho(|s|^2/eps^2); xi_eps = rho(loglog(1/|s|^2) - 1/eps + 1), which
/// is 1 where loglog(1/|s|^2) <= 1/eps and 0 past 1/eps + 1. Points with
/// |s| >= 1 are clamped to the value 1 for xi_eps.
CutoffValue cutoff_eval(const CutoffFamily& c, const Point& p, bool with_derivative = false);

/// Largest eps with xi_eps = 1 at a point where |s_W| = modulus (0 < modulus < 1);
/// +infinity if loglog(1/modulus^2) <= 0.
double xi_unit_threshold(double modulus);

/// Integral over the disk of |grad c|^2 = 4 |dc/dz|^2 using the rule.
double cutoff_gradient_energy(const CutoffFamily& c, const DiskRule& rule);

/// Same integral for xi_eps with s_W = z, computed in the coordinate
/// t = loglog(1/|z|^2) where the transition region is the unit interval
/// [1/eps, 1/eps + 1] at any eps (in z it sits at radii far below double
/// precision once eps < 1/4). Gauss-Legendre of the given order on it.
double xi_gradient_energy(double epsilon, int order = 32);

}  // namespace bergext
