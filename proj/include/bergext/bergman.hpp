#pragma once

// Truncated weighted Bergman spaces on the disk and bidisk.
//
// A model is the span of the monomials z1^a z2^b of the chosen basis inside
// A^2_phi, with the Gram matrix of the e^{-phi} inner product assembled by
// quadrature. Coefficient vectors c represent h = sum_n c_n p_n and carry the
// norm ||h||^2 = c* H c, where H(m, n) = <p_n, p_m> = integral of
// p_n conj(p_m) e^{-phi}.

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "bergext/linalg.hpp"
#include "bergext/quadrature.hpp"
#include "bergext/weights.hpp"

namespace bergext {

/// z1^a z2^b.
struct Monomial {
  int a = 0;
  int b = 0;
  friend bool operator==(const Monomial&, const Monomial&) = default;
};

std::string to_string(const Monomial& m, Domain domain);

enum class BidiskBasis {
  tensor,        ///< a, b <= D
  total_degree,  ///< a + b <= D
};

using Rule = std::variant<DiskRule, BidiskRule>;

struct ModelOptions {
  BidiskBasis basis = BidiskBasis::tensor;
  /// Rebuild the Gram matrix with doubled quadrature orders and record the
  /// relative max-entry change; a warning is attached above 1e-8.
  bool check_convergence = false;
  /// Equilibrated condition number above which the model is rejected.
  double max_condition = 1e14;
  /// Use the serial reference assembly instead of the parallel kernel.
  bool serial = false;
};

class BergmanModel {
 public:
  [[nodiscard]] Domain domain() const { return domain_; }
  [[nodiscard]] const Weight& weight() const { return weight_; }
  [[nodiscard]] int degree() const { return degree_; }
  [[nodiscard]] const std::vector<Monomial>& basis() const { return basis_; }
  [[nodiscard]] Eigen::Index dimension() const { return static_cast<Eigen::Index>(basis_.size()); }
  [[nodiscard]] const Matrix& gram() const { return gram_; }
  [[nodiscard]] const HermitianFactor& factor() const { return factor_; }
  /// C with C* H C = I; column j holds the coefficients of e_j.
  [[nodiscard]] const Matrix& orthonormal_coeffs() const { return factor_.orthonormal(); }
  /// 2-norm condition number of H.
  [[nodiscard]] double condition_number() const { return condition_; }
  /// Condition number after diagonal equilibration (drives the degeneracy test).
  [[nodiscard]] double scaled_condition_number() const { return factor_.scaled_condition(); }
  [[nodiscard]] double min_eigenvalue() const { return min_eigenvalue_; }
  [[nodiscard]] const std::vector<std::string>& warnings() const { return warnings_; }
  /// Relative change of max |H_ij| under doubled orders, if checked.
  [[nodiscard]] std::optional<double> convergence_change() const { return convergence_change_; }
  [[nodiscard]] const Rule& rule() const { return rule_; }

  /// Index of a monomial in the basis, or -1.
  [[nodiscard]] Eigen::Index index_of(Monomial m) const;
  /// (p_0(z), ..., p_{n-1}(z)).
  [[nodiscard]] Vector monomials_at(const Point& p) const;
  [[nodiscard]] Complex evaluate(const Vector& coeffs, const Point& p) const;
  [[nodiscard]] double norm_sq(const Vector& coeffs) const;
  /// H^{-1} b.
  [[nodiscard]] Vector solve(const Vector& b) const { return factor_.solve(b); }

 private:
  friend BergmanModel build_model(const Weight&, int, const Rule&, const ModelOptions&);

  Domain domain_ = Domain::disk;
  Weight weight_;
  int degree_ = 0;
  std::vector<Monomial> basis_;
  Matrix gram_;
  HermitianFactor factor_;
  double condition_ = 0.0;
  double min_eigenvalue_ = 0.0;
  std::vector<std::string> warnings_;
  std::optional<double> convergence_change_;
  Rule rule_;
};

/// Basis of the model: z^n, n <= D on the disk; z1^a z2^b on the bidisk.
std::vector<Monomial> make_basis(Domain domain, int degree, BidiskBasis basis);

/// Gram matrix H(m, n) = sum_i w_i p_n conj(p_m) e^{-phi} (parallel kernel).
Matrix assemble_gram(const Weight& weight, const std::vector<Monomial>& basis, const Rule& rule);
/// Serial per-node reference for assemble_gram.
Matrix assemble_gram_serial(const Weight& weight, const std::vector<Monomial>& basis, const Rule& rule);

/// Discretize A^2_phi. Throws DegeneracyError when a basis monomial is not
/// square integrable against e^{-phi} (named in the message) or when the
/// equilibrated Gram condition number exceeds options.max_condition.
BergmanModel build_model(const Weight& weight, int degree, const Rule& rule,
                         const ModelOptions& options = {});

/// Truncated B_0(z, w) = sum_j e_j(z) conj(e_j(w)).
Complex kernel(const BergmanModel& model, const Point& z, const Point& w);
inline Complex kernel(const BergmanModel& model, Complex z, Complex w) {
  return kernel(model, Point{z, Complex{}}, Point{w, Complex{}});
}

/// B_k(0): squared norm of f -> f^{(k)}(0) on E_k = span{z^n : n >= k}
/// (disk). On the bidisk only k = 0 is defined.
double higher_kernel(const BergmanModel& model, int k);

/// omega_B(0) = B_1(0) / B_0(0).
double bergman_metric_at_zero(const BergmanModel& model);

/// d^2 log B_0(z, z) / dz dzbar at 0 by the five-point stencil of spacing h.
double bergman_metric_stencil(const BergmanModel& model, double h = 1e-3);

/// e_0'(0)/e_0(0) = d/dz1 log B_0(z, z) at 0.
Complex log_kernel_gradient_at_zero(const BergmanModel& model);

/// Summary for export: degree, conditioning, B_k(0) table, omega_B(0).
nlohmann::json model_summary(const BergmanModel& model, int max_k = 6);

}  // namespace bergext
