#include "bergext/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bergext {

namespace {

const char* kind_name(NormKind k) {
  switch (k) {
    case NormKind::log_weighted_bulk: return "log_weighted_bulk";
    case NormKind::gamma_branch: return "gamma_branch";
    case NormKind::derivative_on_y: return "derivative_on_y";
    case NormKind::final_example: return "final_example";
  }
  return "?";
}

NormKind parse_kind(const std::string& s) {
  if (s == "log_weighted_bulk") return NormKind::log_weighted_bulk;
  if (s == "gamma_branch") return NormKind::gamma_branch;
  if (s == "derivative_on_y") return NormKind::derivative_on_y;
  if (s == "final_example") return NormKind::final_example;
  throw ParameterError("NormSpec: unknown kind '" + s + "'");
}

Point branch_point(int branch, Complex z) { return branch == 0 ? Point{Complex{}, z} : Point{z, Complex{}}; }

double normalized_log(double modulus_sq, double delta) { return std::log(modulus_sq) - delta; }

}  // namespace

void NormSpec::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ParameterError("NormSpec: gamma must lie in [0, 1]");
  if (!(r_sing > 0.0 && r_sing < 1.0)) throw ParameterError("NormSpec: r_sing must lie in (0, 1)");
  if (!(epsilon > 0.0)) throw ParameterError("NormSpec: epsilon must be positive");
  if (!(section_delta > 0.0)) throw ParameterError("NormSpec: section_delta must be positive");
  if (conic_k < 1) throw ParameterError("NormSpec: conic_k must be >= 1");
}

nlohmann::json NormSpec::to_json() const {
  return {{"kind", kind_name(kind)},
          {"gamma", gamma},
          {"epsilon", epsilon},
          {"region", region == NormRegion::full ? "full" : "exclude_singular"},
          {"r_sing", r_sing},
          {"section_delta", section_delta},
          {"conic_k", conic_k},
          {"variant", variant == BranchVariant::theorem ? "theorem" : "conjecture"},
          {"log_factor", log_factor}};
}

NormSpec NormSpec::from_json(const nlohmann::json& j) {
  NormSpec s;
  if (j.contains("kind")) s.kind = parse_kind(j.at("kind").get<std::string>());
  s.gamma = j.value("gamma", s.gamma);
  s.epsilon = j.value("epsilon", s.epsilon);
  if (j.contains("region")) {
    const auto r = j.at("region").get<std::string>();
    if (r == "full") s.region = NormRegion::full;
    else if (r == "exclude_singular") s.region = NormRegion::exclude_singular;
    else throw ParameterError("NormSpec: unknown region '" + r + "'");
  }
  s.r_sing = j.value("r_sing", s.r_sing);
  s.section_delta = j.value("section_delta", s.section_delta);
  s.conic_k = j.value("conic_k", s.conic_k);
  if (j.contains("variant")) {
    const auto v = j.at("variant").get<std::string>();
    if (v == "theorem") s.variant = BranchVariant::theorem;
    else if (v == "conjecture") s.variant = BranchVariant::conjecture;
    else throw ParameterError("NormSpec: unknown variant '" + v + "'");
  }
  s.log_factor = j.value("log_factor", s.log_factor);
  s.validate();
  return s;
}

double log_weighted_bulk_norm(const Poly& u, const Weight& weight, const NormSpec& spec, const BidiskRule& rule) {
  spec.validate();
  if (weight.domain() != Domain::bidisk) throw ParameterError("log_weighted_bulk_norm: bidisk weight required");
  if (u.is_zero()) return 0.0;
  const double delta = spec.section_delta;
  const bool exclude = spec.region == NormRegion::exclude_singular;
  const double r_sing = spec.r_sing;

  bool divisible = true;
  Poly q(Poly::Kind::holomorphic);
  try {
    q = u.divide_by_variable(0, 0.0).divide_by_variable(1, 0.0);
  } catch (const DivergenceError&) {
    divisible = false;
  }

  const Complex total = integrate(rule, [&](const Point& p) -> Complex {
    if (exclude && std::abs(p[0]) < r_sing && std::abs(p[1]) < r_sing) return 0.0;
    const double m1 = std::norm(p[0]);
    const double m2 = std::norm(p[1]);
    const double l1 = normalized_log(m1, delta);
    const double l2 = normalized_log(m2, delta);
    const double quotient = divisible ? std::norm(q(p)) : std::norm(u(p)) / (m1 * m2);
    return quotient / (l1 * l1 * l2 * l2) * weight.density(p);
  });
  const double v = total.real();
  if (!std::isfinite(v)) throw DivergenceError("log_weighted_bulk_norm: integral is not finite");
  return v;
}

FunctionalValue gamma_branch_norm(const std::vector<Complex>& u, int branch, const Weight& weight,
                                  const NormSpec& spec, const DiskRule& rule) {
  spec.validate();
  if (branch != 0 && branch != 1) throw ParameterError("gamma_branch_norm: branch must be 0 or 1");
  if (std::all_of(u.begin(), u.end(), [](Complex c) { return c == Complex{}; })) return {};
  const Poly f = Poly::univariate(u, 0);
  const double power = 1.0 / (1.0 + spec.gamma);
  const double weight_power = spec.variant == BranchVariant::theorem ? power : 1.0;
  const double conic = 1.0 - 1.0 / spec.conic_k;

  const ProbedIntegral pi = integrate_probed(rule, [&](Complex z) {
    const double r = std::abs(z);
    const double quotient = std::pow(std::abs(f(z)) / r, 2.0 * power);
    const WeightValue phi = weight.evaluate(branch_point(branch, z));
    const double w = phi.singular ? std::numeric_limits<double>::infinity() : std::exp(-weight_power * phi.value);
    const double density = conic > 0.0 ? std::pow(r, -2.0 * conic) : 1.0;
    return quotient * w * density;
  });
  if (pi.divergent) return FunctionalValue::infinite(pi.shell_rate);
  return {std::pow(pi.value, 1.0 + spec.gamma), false, pi.shell_rate};
}

FunctionalValue derivative_norm_on_y(const CrossData& data, const Weight& weight, const NormSpec& spec,
                                     const DiskRule& rule) {
  spec.validate();
  FunctionalValue out;
  for (int branch = 0; branch < 2; ++branch) {
    const std::vector<Complex>& coeffs = branch == 0 ? data.f1() : data.f2();
    if (std::all_of(coeffs.begin(), coeffs.end(), [](Complex c) { return c == Complex{}; })) continue;
    // The branch function as a polynomial in its own coordinate: z2 on V1, z1 on V2.
    const int var = branch == 0 ? 1 : 0;
    const Poly f = Poly::univariate(coeffs, var);
    const Poly fprime = f.derivative(var);
    const ProbedIntegral pi = integrate_probed(rule, [&](Complex z) {
      const Point p = branch_point(branch, z);
      // d f - f d phi; cancellation below round-off is an exact zero.
      const Complex df = fprime(p);
      const Complex fd = f(p) * weight.dz(p)[static_cast<std::size_t>(var)];
      Complex d = df - fd;
      if (std::abs(d) <= 64 * std::numeric_limits<double>::epsilon() * (std::abs(df) + std::abs(fd))) d = 0.0;
      double factor = 1.0;
      if (spec.log_factor) {
        const double l = normalized_log(std::max(std::norm(p[0]), std::norm(p[1])), spec.section_delta);
        factor = l * l;
      }
      return factor * std::norm(d) * weight.density(p);
    });
    if (pi.divergent) return FunctionalValue::infinite(pi.shell_rate);
    out.value += pi.value;
    out.shell_rate = std::max(out.shell_rate, pi.shell_rate);
  }
  return out;
}

FunctionalValue branch_l2_norm(const CrossData& data, const Weight& weight, const DiskRule& rule) {
  FunctionalValue out;
  for (int branch = 0; branch < 2; ++branch) {
    const std::vector<Complex>& coeffs = branch == 0 ? data.f1() : data.f2();
    if (std::all_of(coeffs.begin(), coeffs.end(), [](Complex c) { return c == Complex{}; })) continue;
    const Poly f = Poly::univariate(coeffs, 0);
    const ProbedIntegral pi = integrate_probed(rule, [&](Complex z) {
      return std::norm(f(z)) * weight.density(branch_point(branch, z));
    });
    if (pi.divergent) return FunctionalValue::infinite(pi.shell_rate);
    out.value += pi.value;
    out.shell_rate = std::max(out.shell_rate, pi.shell_rate);
  }
  return out;
}

Weight final_example_weight(double epsilon) {
  RegularizedLogWeight reg;
  reg.epsilon = epsilon;
  reg.direction = Poly::variable(0) - Poly::variable(1);
  reg.kind = Regularization::additive;
  return Weight::regularized(Domain::bidisk, reg);
}

FunctionalValue final_example_norm(double epsilon, const DiskRule& rule) {
  NormSpec spec;
  spec.kind = NormKind::final_example;
  spec.gamma = 0.0;
  spec.epsilon = epsilon;
  spec.variant = BranchVariant::conjecture;
  return gamma_branch_norm({0.0, 1.0}, 1, final_example_weight(epsilon), spec, rule);
}

}  // namespace bergext
