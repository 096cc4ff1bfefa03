#pragma once

// Norm functionals on the bidisk model with sections s1 = z1, s2 = z2 and
// s_Y = z1 z2. The branch V1 = {z1 = 0} is parametrized by z2 and the branch
// V2 = {z2 = 0} by z1; on V_i the quotient u/ds is u/z with z the branch
// variable.

#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bergext/extension.hpp"
#include "bergext/polynomial.hpp"
#include "bergext/quadrature.hpp"
#include "bergext/weights.hpp"

namespace bergext {

enum class NormKind { log_weighted_bulk, gamma_branch, derivative_on_y, final_example };
enum class NormRegion { full, exclude_singular };
enum class BranchVariant { theorem, conjecture };

struct NormSpec {
  NormKind kind = NormKind::log_weighted_bulk;
  double gamma = 1.0;
  double epsilon = 0.1;
  NormRegion region = NormRegion::full;
  /// Radius of the polydisk around the node removed by exclude_singular.
  double r_sing = 0.25;
  /// Sections are normalized to |s|^2 <= e^{-delta}: log|s|^2 is read as
  /// log|s|^2 - delta.
  double section_delta = 1.0;
  /// Conic density |z|^{-2(1 - 1/k)} on the branch; k = 1 is Lebesgue measure.
  int conic_k = 1;
  BranchVariant variant = BranchVariant::theorem;
  /// derivative_on_y: multiply by log^2(max |s_j|^2).
  bool log_factor = true;

  /// Throws ParameterError on gamma outside [0, 1], r_sing outside (0, 1),
  /// epsilon <= 0 or conic_k < 1.
  void validate() const;
  [[nodiscard]] nlohmann::json to_json() const;
  static NormSpec from_json(const nlohmann::json& j);
};

/// A functional value or a tagged +infinity. `shell_rate` is the ratio of
/// innermost to next annulus contribution seen by the probe (near 1 when the
/// integral diverges).
struct FunctionalValue {
  double value = 0.0;
  bool divergent = false;
  double shell_rate = 0.0;

  static FunctionalValue infinite(double rate) {
    return {std::numeric_limits<double>::infinity(), true, rate};
  }
};

/// Integral over the bidisk (or the region of `spec`) of
/// |U|^2 / (|z1 z2|^2 prod_j log^2|z_j|^2) e^{-phi}. When U is divisible by
/// z1 z2 the division is exact; otherwise the singular integrand is summed on
/// the rule. Throws DivergenceError if the sum is not finite.
double log_weighted_bulk_norm(const Poly& u, const Weight& weight, const NormSpec& spec, const BidiskRule& rule);

/// (integral over V_branch of |u/z|^{2/(1+gamma)} w dlambda)^{1+gamma} with
/// w = e^{-phi/(1+gamma)} (theorem) or e^{-phi} (conjecture). `u` holds the
/// coefficients of the branch function; branch 0 is V1, branch 1 is V2.
FunctionalValue gamma_branch_norm(const std::vector<Complex>& u, int branch, const Weight& weight,
                                  const NormSpec& spec, const DiskRule& rule);

/// Sum over both branches of the integral of L |d^phi f_i|^2 e^{-phi}, where
/// L = log^2(max |s_j|^2) when spec.log_factor is set and 1 otherwise.
FunctionalValue derivative_norm_on_y(const CrossData& data, const Weight& weight, const NormSpec& spec,
                                     const DiskRule& rule);

/// Sum over both branches of the integral of |f_i|^2 e^{-phi}.
FunctionalValue branch_l2_norm(const CrossData& data, const Weight& weight, const DiskRule& rule);

/// Weight log(eps^2 + |z1 - z2|^2) on the bidisk.
Weight final_example_weight(double epsilon);

/// gamma_branch_norm with gamma = 0, conjecture variant, f2 = z1 and
/// final_example_weight(epsilon).
FunctionalValue final_example_norm(double epsilon, const DiskRule& rule);

}  // namespace bergext
