#pragma once

// Minimal-norm extension of jets at the origin of the disk and of data on the
// cross V = {z1 z2 = 0} in the bidisk.

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bergext/bergman.hpp"

namespace bergext {

/// Prescribed derivatives h^{(k)}(0) = a_k, k < N.
struct Jet {
  std::vector<Complex> values;

  [[nodiscard]] std::size_t size() const { return values.size(); }
};

/// Boundary data on the cross: f1 lives on {z1 = 0} as a function of z2, f2
/// on {z2 = 0} as a function of z1. Both are coefficient vectors.
class CrossData {
 public:
  /// Throws ParameterError unless f1(0) == f2(0) exactly.
  CrossData(std::vector<Complex> f1, std::vector<Complex> f2);

  [[nodiscard]] const std::vector<Complex>& f1() const { return f1_; }
  [[nodiscard]] const std::vector<Complex>& f2() const { return f2_; }
  [[nodiscard]] Complex a0() const { return f1_.front(); }
  [[nodiscard]] int degree() const;
  [[nodiscard]] double norm() const;

 private:
  std::vector<Complex> f1_;
  std::vector<Complex> f2_;
};

/// One level of the jet decomposition h = h_0 + ... + h_{N-1}.
struct LevelTerm {
  int k = 0;
  Complex b;              ///< b_k = a_k - sum_{j<k} h_j^{(k)}(0)
  double bergman = 0.0;   ///< B_k(0)
  double norm_sq = 0.0;   ///< ||h_k||^2 = |b_k|^2 / B_k(0)
};

struct CrossSplit {
  Vector h0;
  Vector h1;
  double h0_norm_sq = 0.0;
  double h1_norm_sq = 0.0;
  /// | ||h||^2 - ||h0||^2 - ||h1||^2 | / ||h||^2
  double pythagoras_defect = 0.0;
};

struct ExtensionReport {
  Domain domain = Domain::disk;
  std::vector<Monomial> basis;
  Vector coefficients;
  double norm_sq = 0.0;
  std::vector<LevelTerm> levels;
  std::optional<CrossSplit> cross;
  double constraint_residual = 0.0;
  double data_norm = 0.0;
  double condition_number = 0.0;
  /// Condition number of the N x N representer system (jet solvers).
  double representer_condition = 0.0;
  std::vector<std::string> warnings;

  [[nodiscard]] nlohmann::json to_json() const;
};

/// Constraint matrix L with (L c)_k = h^{(k)}(0) for k < n_derivatives.
Matrix jet_constraints(const BergmanModel& model, int n_derivatives);

/// ||P (H c)|| / ||H c|| where P projects onto the null space of L: zero
/// exactly when c is stationary for c* H c on {L c = const}.
double stationarity_residual(const BergmanModel& model, const Vector& coeffs, const Matrix& constraints);

/// Minimal-norm h with the given jet, from the representer system
/// (L H^{-1} L*) lambda = a, h = H^{-1} L* lambda.
ExtensionReport extend_jet_direct(const BergmanModel& model, const Jet& jet);

/// Same minimizer built level by level: e_k spans E_k minus E_{k+1},
/// h_k = (b_k / e_k^{(k)}(0)) e_k, ||h||^2 = sum |b_k|^2 / B_k(0).
ExtensionReport extend_jet_recursive(const BergmanModel& model, const Jet& jet);

struct JetEstimate {
  double exact = 0.0;      ///< (|a0|^2 + |a1 - a0 g|^2 / omega_B) / B_0(0)
  double ot_style = 0.0;   ///< (|a0|^2 + |a1 - a0 g|^2 / omega_B) e^{-phi(0)}
  Complex gradient;        ///< g = e_0'(0)/e_0(0)
  double omega_b = 0.0;
};

/// Right-hand sides for first-order jets (N = 2).
JetEstimate rhs_estimate_jet(const BergmanModel& model, const Jet& jet);

/// Minimal extension of cross data: coefficients of z2^n and z1^m fixed by f1
/// and f2, mixed coefficients by a Schur-complement solve.
ExtensionReport extend_cross(const BergmanModel& model, const CrossData& data);

/// h0 = (a0 / e_0(0)) e_0 and h1 = h - h0 for the minimal cross extension h.
CrossSplit decompose_cross(const BergmanModel& model, const CrossData& data);

struct CrossEstimate {
  double point_term = 0.0;     ///< |a0|^2 / B_0(0)
  double branch_terms[2] = {};  ///< integral over V_i of |f_i - h0|^2 / |z|^2 e^{-phi}
  double total = 0.0;
};

/// |a0|^2 / B_0(0) + sum_i integral_{V_i} |f_i - h0|^2 / |z_i|^2 e^{-phi} on
/// the branch disks, each integrated with `rule_on_v`. Throws DivergenceError
/// when f_i - h0 does not vanish at the origin or a branch integral fails the
/// integrability probe.
CrossEstimate rhs_estimate_cross(const BergmanModel& model, const CrossData& data, const DiskRule& rule_on_v);

}  // namespace bergext
