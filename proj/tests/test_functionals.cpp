#include <doctest.h>

#include <cmath>

#include <boost/math/special_functions/expint.hpp>

#include "bergext/functionals.hpp"

using namespace bergext;

namespace {

const DiskRule& branch() {
  static const DiskRule rule{DiskRuleSpec{}};
  return rule;
}

const BidiskRule& radial_bidisk() {
  static const BidiskRule rule = [] {
    DiskRuleSpec s;
    s.radial_order = 8;
    s.angular_order = 8;
    s.annuli = 30;
    return BidiskRule(s, s, BidiskGrading::tensor);
  }();
  return rule;
}

NormSpec branch_spec(double gamma, BranchVariant variant = BranchVariant::theorem) {
  NormSpec s;
  s.kind = NormKind::gamma_branch;
  s.gamma = gamma;
  s.variant = variant;
  return s;
}

Weight diagonal_log() {
  return Weight::structured(Domain::bidisk, {LogTerm{1.0, Poly::parse("z1 - z2")}}, Poly(Poly::Kind::real));
}

}  // namespace

TEST_CASE("log-weighted bulk norm of z1 z2 with the flat weight") {
  // Each factor: pi e E_2(1) from the substitution |z|^2 = e^{-u}.
  const double factor = kPi * std::exp(1.0) * boost::math::expint(2, 1.0);
  const NormSpec spec;
  const double v = log_weighted_bulk_norm(Poly::parse("z1*z2"), Weight(Domain::bidisk), spec, radial_bidisk());
  CHECK(v == doctest::Approx(factor * factor).epsilon(1e-8));
  CHECK(log_weighted_bulk_norm(Poly(Poly::Kind::holomorphic), Weight(Domain::bidisk), spec, radial_bidisk()) == 0.0);
  const double scaled =
      log_weighted_bulk_norm(Poly::parse("2*z1*z2"), Weight(Domain::bidisk), spec, radial_bidisk());
  CHECK(scaled == doctest::Approx(4 * v).epsilon(1e-14));
}

TEST_CASE("bulk norm with a larger section shift") {
  // delta = 2: each factor is pi e^2 E_2(2) / 2.
  NormSpec spec;
  spec.section_delta = 2.0;
  const double factor = kPi * std::exp(2.0) * boost::math::expint(2, 2.0) / 2.0;
  const double v = log_weighted_bulk_norm(Poly::parse("z1*z2"), Weight(Domain::bidisk), spec, radial_bidisk());
  CHECK(v == doctest::Approx(factor * factor).epsilon(1e-8));
}

TEST_CASE("gamma branch norm examples") {
  const Weight flat(Domain::bidisk);
  const FunctionalValue one = gamma_branch_norm({0.0, 1.0}, 1, flat, branch_spec(1.0), branch());
  CHECK_FALSE(one.divergent);
  CHECK(one.value == doctest::Approx(kPi * kPi).epsilon(1e-10));
  const FunctionalValue zero = gamma_branch_norm({0.0, 1.0}, 0, flat, branch_spec(0.0), branch());
  CHECK(zero.value == doctest::Approx(kPi).epsilon(1e-10));
}

TEST_CASE("gamma branch norm is 2-homogeneous and continuous in gamma") {
  const Weight w = Weight::regularized(Domain::bidisk, {0.2, Poly::parse("z1 - z2")});
  const std::vector<Complex> u{0.0, Complex{1.0, 1.0}, -0.5};
  std::vector<Complex> u3;
  for (const Complex& c : u) u3.push_back(3.0 * c);
  for (double g : {0.0, 0.25, 0.5, 1.0}) {
    const double a = gamma_branch_norm(u, 1, w, branch_spec(g), branch()).value;
    const double b = gamma_branch_norm(u3, 1, w, branch_spec(g), branch()).value;
    CHECK(b == doctest::Approx(9 * a).epsilon(1e-12));
    const double near = gamma_branch_norm(u, 1, w, branch_spec(std::min(1.0, g + 0.01)), branch()).value;
    if (g < 1.0) CHECK(std::abs(near - a) <= 0.2 * a);
  }
}

TEST_CASE("non-vanishing data diverge in the conjecture variant") {
  const FunctionalValue v =
      gamma_branch_norm({1.0}, 1, Weight(Domain::bidisk), branch_spec(0.0, BranchVariant::conjecture), branch());
  CHECK(v.divergent);
  CHECK(std::isinf(v.value));
  CHECK(v.shell_rate >= kDivergentShellRate);
}

TEST_CASE("conic density") {
  NormSpec spec = branch_spec(1.0);
  spec.conic_k = 2;
  const FunctionalValue v = gamma_branch_norm({0.0, 1.0}, 1, Weight(Domain::bidisk), spec, branch());
  CHECK_FALSE(v.divergent);
  CHECK(v.value == doctest::Approx(4 * kPi * kPi).epsilon(1e-8));
}

TEST_CASE("final example norm") {
  for (double eps : {0.2, 0.1, 0.05}) {
    const FunctionalValue v = final_example_norm(eps, branch());
    CHECK(v.value == doctest::Approx(kPi * std::log1p(1.0 / (eps * eps))).epsilon(1e-8));
  }
  CHECK(final_example_weight(0.1).domain() == Domain::bidisk);
}

TEST_CASE("derivative norm on the cross") {
  NormSpec spec;
  spec.kind = NormKind::derivative_on_y;
  spec.log_factor = false;
  const CrossData data({0.0}, {0.0, 1.0});
  // d^phi z1 = 0 for phi = log|z1 - z2|^2 on {z2 = 0}.
  const FunctionalValue raw = derivative_norm_on_y(data, diagonal_log(), spec, branch());
  CHECK(raw.value < 1e-20);
  // Regularized: pi integral_0^1 u^2 e^u du = pi (e - 2) for every eps.
  for (double eps : {0.5, 0.25, 0.125}) {
    const Weight w = Weight::regularized(Domain::bidisk, {eps, Poly::parse("z1 - z2")});
    const FunctionalValue v = derivative_norm_on_y(data, w, spec, branch());
    CHECK(v.value == doctest::Approx(kPi * (std::exp(1.0) - 2.0)).epsilon(1e-8));
  }
  spec.log_factor = true;
  const Weight w = Weight::regularized(Domain::bidisk, {0.25, Poly::parse("z1 - z2")});
  CHECK(derivative_norm_on_y(data, w, spec, branch()).value > kPi * (std::exp(1.0) - 2.0));
}

TEST_CASE("branch L2 norm") {
  const CrossData data({1.0, 1.0}, {1.0});
  const double v = branch_l2_norm(data, Weight(Domain::bidisk), branch()).value;
  CHECK(v == doctest::Approx(kPi * 1.5 + kPi).epsilon(1e-10));
}

TEST_CASE("norm spec validation and JSON") {
  NormSpec s;
  s.gamma = 1.5;
  CHECK_THROWS_AS(s.validate(), ParameterError);
  s = NormSpec{};
  s.r_sing = 1.0;
  CHECK_THROWS_AS(s.validate(), ParameterError);
  s = NormSpec{};
  s.epsilon = 0.0;
  CHECK_THROWS_AS(s.validate(), ParameterError);
  s = NormSpec{};
  s.conic_k = 0;
  CHECK_THROWS_AS(s.validate(), ParameterError);

  NormSpec t;
  t.kind = NormKind::final_example;
  t.gamma = 0.25;
  t.variant = BranchVariant::conjecture;
  t.region = NormRegion::exclude_singular;
  const NormSpec back = NormSpec::from_json(t.to_json());
  CHECK(back.kind == t.kind);
  CHECK(back.gamma == t.gamma);
  CHECK(back.variant == t.variant);
  CHECK(back.region == t.region);
}
