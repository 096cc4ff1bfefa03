#pragma once

// Graded tensor polar quadrature on the unit disk and bidisk.
//
// A disk rule is polar about its grading center c: every ray from c is cut at
// the unit circle, the normalized radial coordinate s in [0, 1] is split into
// geometrically graded annuli (innermost [0, q^(L-1)], then [q^(j+1), q^j]),
// each annulus carries a Gauss-Legendre rule and the angle a uniform
// trapezoid rule. Integrands with log or |z - c|^(-2a), a < 1, singularities
// at c converge as the orders grow. Nodes never coincide with c.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "bergext/types.hpp"

namespace bergext {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussLegendre gauss_legendre(int order);

struct DiskRuleSpec {
  int radial_order = 64;    ///< Gauss-Legendre points per annulus
  int angular_order = 128;  ///< trapezoid points in the angle
  std::vector<Complex> grading_centers{Complex{0.0, 0.0}};  ///< at most one; empty means no grading
  double grading_ratio = 0.5;
  int annuli = 20;

  /// Same rule with radial and angular orders doubled.
  [[nodiscard]] DiskRuleSpec doubled() const;
};

class DiskRule {
 public:
  DiskRule() = default;
  explicit DiskRule(const DiskRuleSpec& spec);

  [[nodiscard]] std::size_t size() const { return nodes_.size(); }
  [[nodiscard]] std::span<const Complex> nodes() const { return nodes_; }
  [[nodiscard]] std::span<const double> weights() const { return weights_; }
  /// Annulus index of each node, 0 for the innermost annulus.
  [[nodiscard]] std::span<const int> shells() const { return shells_; }
  [[nodiscard]] int shell_count() const { return shell_count_; }
  [[nodiscard]] const DiskRuleSpec& spec() const { return spec_; }
  [[nodiscard]] Complex center() const { return center_; }
  [[nodiscard]] bool graded() const { return shell_count_ > 1; }

 private:
  DiskRuleSpec spec_;
  Complex center_{0.0, 0.0};
  int shell_count_ = 0;
  std::vector<Complex> nodes_;
  std::vector<double> weights_;
  std::vector<int> shells_;
};

DiskRule disk_rule(int radial_order, int angular_order, std::vector<Complex> grading_centers,
                   double grading_ratio, int annuli = 20);

/// How the z1 factor of a bidisk rule is laid out.
enum class BidiskGrading {
  tensor,    ///< one fixed z1 rule for every z2 node
  diagonal,  ///< z1 rule re-centered at each z2 node, graded toward {z1 = z2}
};

/// Bidisk rule over (z1, z2). The z2 rule is the outer loop; for each z2
/// node an inner z1 rule is either shared (tensor) or rebuilt about z1 = z2.
class BidiskRule {
 public:
  BidiskRule() = default;
  BidiskRule(const DiskRuleSpec& z1_spec, const DiskRuleSpec& z2_spec, BidiskGrading grading);

  [[nodiscard]] const DiskRule& outer() const { return outer_; }
  [[nodiscard]] BidiskGrading grading() const { return grading_; }
  [[nodiscard]] const DiskRuleSpec& z1_spec() const { return z1_spec_; }
  [[nodiscard]] const DiskRuleSpec& z2_spec() const { return z2_spec_; }

  /// The z1 rule paired with outer node `outer_index`. In tensor mode this is
  /// the shared rule; in diagonal mode a rule centered at that z2.
  [[nodiscard]] DiskRule inner_rule(std::size_t outer_index) const;
  [[nodiscard]] const DiskRule& tensor_inner() const { return inner_; }

  /// Total number of (z1, z2) nodes.
  [[nodiscard]] std::size_t size() const;

  [[nodiscard]] BidiskRule doubled() const;

 private:
  DiskRuleSpec z1_spec_;
  DiskRuleSpec z2_spec_;
  BidiskGrading grading_ = BidiskGrading::tensor;
  DiskRule outer_;
  DiskRule inner_;
};

BidiskRule bidisk_rule(const DiskRuleSpec& z1_spec, const DiskRuleSpec& z2_spec,
                       BidiskGrading grading = BidiskGrading::tensor);

using DiskIntegrand = std::function<Complex(Complex)>;
using BidiskIntegrand = std::function<Complex(const Point&)>;

/// Sum w_i f(z_i) with a deterministic fixed-tree reduction (OpenMP when
/// available). Throws EvaluationError naming the first node where f is not
/// finite.
Complex integrate(const DiskRule& rule, const DiskIntegrand& f);
Complex integrate(const BidiskRule& rule, const BidiskIntegrand& f);

/// Serial left-fold reference for the two kernels above.
Complex integrate_serial(const DiskRule& rule, const DiskIntegrand& f);
Complex integrate_serial(const BidiskRule& rule, const BidiskIntegrand& f);

/// Integral together with the integrability probe of a graded rule.
///
/// For |z - c|^(-2a) the contributions of successive annuli near the center
/// shrink by q^(2 - 2a); `shell_rate` is the innermost-to-next ratio and
/// approaches 1 from below only as a -> 1. A rate at or above
/// `kDivergentShellRate` marks the integral as divergent.
struct ProbedIntegral {
  double value = 0.0;
  double shell_rate = 0.0;
  bool divergent = false;
};

inline constexpr double kDivergentShellRate = 0.99;

ProbedIntegral integrate_probed(const DiskRule& rule, const std::function<double(Complex)>& f);

}  // namespace bergext
