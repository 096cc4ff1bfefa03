#include <doctest.h>

#include <cmath>
#include <random>

#include "bergext/extension.hpp"

using namespace bergext;

namespace {

const DiskRule& disk() {
  static const DiskRule rule{DiskRuleSpec{}};
  return rule;
}

const BidiskRule& bidisk() {
  static const BidiskRule rule = [] {
    DiskRuleSpec s;
    s.radial_order = 16;
    s.angular_order = 32;
    s.annuli = 1;
    s.grading_centers.clear();
    return BidiskRule(s, s, BidiskGrading::tensor);
  }();
  return rule;
}

DiskRule branch_rule() {
  DiskRuleSpec s;
  s.radial_order = 16;
  s.angular_order = 32;
  return DiskRule(s);
}

Weight harmonic_bidisk() {
  return Weight::structured(Domain::bidisk, {}, Poly::parse("x1 - 0.5*x2", Poly::Kind::real));
}

}  // namespace

TEST_CASE("flat first-order jet") {
  const BergmanModel model = build_model(Weight(Domain::disk), 8, disk());
  const Complex a0{1.0, -2.0}, a1{0.5, 3.0};
  const ExtensionReport r = extend_jet_direct(model, Jet{{a0, a1}});
  CHECK(r.norm_sq == doctest::Approx(kPi * std::norm(a0) + kPi / 2 * std::norm(a1)).epsilon(1e-10));
  CHECK(std::abs(r.coefficients(0) - a0) < 1e-10);
  CHECK(std::abs(r.coefficients(1) - a1) < 1e-10);
  for (Eigen::Index i = 2; i < r.coefficients.size(); ++i) CHECK(std::abs(r.coefficients(i)) < 1e-10);
  CHECK(r.constraint_residual < 1e-12);
}

TEST_CASE("single value extension is the normalized kernel") {
  const BergmanModel model = build_model(Weight::linear_re(2), 12, disk());
  const Complex a0{0.7, 0.2};
  const ExtensionReport r = extend_jet_direct(model, Jet{{a0}});
  CHECK(r.norm_sq == doctest::Approx(std::norm(a0) / higher_kernel(model, 0)).epsilon(1e-10));
  const Point z{Complex{0.3, -0.1}, Complex{}};
  const Complex expected = a0 * kernel(model, z, Point{}) / kernel(model, Point{}, Point{});
  CHECK(std::abs(model.evaluate(r.coefficients, z) - expected) < 1e-10);
}

TEST_CASE("direct and recursive jet solvers agree") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> mdist(0.0, 3.0);
  std::uniform_int_distribution<int> ndist(1, 4);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 50; ++trial) {
    const Weight w = trial % 5 == 4 ? clamp_max(Weight::linear_re(mdist(rng)), 0.1, 10.0)
                                    : Weight::linear_re(mdist(rng));
    const BergmanModel model = build_model(w, 10, disk());
    Jet jet;
    const int n = ndist(rng);
    for (int k = 0; k < n; ++k) jet.values.emplace_back(n01(rng), n01(rng));
    const ExtensionReport d = extend_jet_direct(model, jet);
    const ExtensionReport r = extend_jet_recursive(model, jet);
    CHECK(r.norm_sq == doctest::Approx(d.norm_sq).epsilon(1e-8));
    CHECK((r.coefficients - d.coefficients).norm() <= 1e-7 * d.coefficients.norm());
    double levels = 0.0;
    for (const LevelTerm& t : r.levels) {
      CHECK(t.norm_sq == doctest::Approx(std::norm(t.b) / t.bergman).epsilon(1e-12));
      levels += t.norm_sq;
    }
    CHECK(levels == doctest::Approx(d.norm_sq).epsilon(1e-8));
    CHECK(r.levels.front().b == jet.values.front());
  }
}

TEST_CASE("first-order jet estimate is exact") {
  for (double m : {0.0, 1.0, 2.5}) {
    const BergmanModel model = build_model(Weight::linear_re(m), 14, disk());
    const Jet jet{{Complex{1.0, 0.5}, Complex{-2.0, 1.0}}};
    const JetEstimate e = rhs_estimate_jet(model, jet);
    CHECK(e.exact == doctest::Approx(extend_jet_direct(model, jet).norm_sq).epsilon(1e-9));
    CHECK(e.omega_b == doctest::Approx(bergman_metric_at_zero(model)).epsilon(1e-12));
    CHECK(e.ot_style > 0.0);
  }
}

TEST_CASE("jet minimizer is stationary and beats perturbations") {
  const BergmanModel model = build_model(Weight::linear_re(1.5), 10, disk());
  const Jet jet{{Complex{1.0}, Complex{0.0, 2.0}, Complex{-1.0}}};
  const ExtensionReport r = extend_jet_direct(model, jet);
  const Matrix l = jet_constraints(model, 3);
  CHECK(stationarity_residual(model, r.coefficients, l) < 1e-8);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 100; ++trial) {
    Vector d = Vector::Zero(model.dimension());
    for (Eigen::Index i = 3; i < d.size(); ++i) d(i) = 1e-2 * Complex{n01(rng), n01(rng)};
    CHECK((l * d).norm() < 1e-14);
    CHECK(model.norm_sq(r.coefficients + d) > r.norm_sq);
  }
}

TEST_CASE("jet argument errors") {
  const BergmanModel model = build_model(Weight(Domain::disk), 3, disk());
  CHECK_THROWS_AS(extend_jet_direct(model, Jet{}), ParameterError);
  CHECK_THROWS_AS(extend_jet_direct(model, Jet{std::vector<Complex>(5, 1.0)}), ParameterError);
  CHECK_THROWS_AS(rhs_estimate_jet(model, Jet{{1.0}}), ParameterError);
  const BergmanModel bi = build_model(Weight(Domain::bidisk), 2, bidisk());
  CHECK_THROWS_AS(extend_jet_recursive(bi, Jet{{1.0}}), ParameterError);
}

TEST_CASE("flat cross extensions") {
  const BergmanModel model = build_model(Weight(Domain::bidisk), 4, bidisk());
  const ExtensionReport c = extend_cross(model, CrossData({1.0}, {1.0}));
  CHECK(c.norm_sq == doctest::Approx(kPi * kPi).epsilon(1e-10));
  // f1 = z2 on {z1 = 0}, f2 = z1 on {z2 = 0}: h = z1 + z2.
  const ExtensionReport s = extend_cross(model, CrossData({0.0, 1.0}, {0.0, 1.0}));
  CHECK(s.norm_sq == doctest::Approx(kPi * kPi).epsilon(1e-10));
  const Point p{Complex{0.3, 0.1}, Complex{-0.2, 0.4}};
  CHECK(std::abs(model.evaluate(s.coefficients, p) - (p[0] + p[1])) < 1e-10);
  CHECK(c.constraint_residual < 1e-12);
  REQUIRE(s.cross.has_value());
  CHECK(s.cross->h0_norm_sq < 1e-20);
}

TEST_CASE("cross split is orthogonal") {
  const BergmanModel model = build_model(harmonic_bidisk(), 5, bidisk());
  const CrossData data({Complex{1.0, 0.5}, 2.0, Complex{0.0, -1.0}}, {Complex{1.0, 0.5}, -1.0});
  const CrossSplit split = decompose_cross(model, data);
  CHECK(split.pythagoras_defect < 1e-10);
  CHECK(split.h0_norm_sq == doctest::Approx(std::norm(data.a0()) / higher_kernel(model, 0)).epsilon(1e-10));
  const ExtensionReport r = extend_cross(model, data);
  CHECK(r.norm_sq == doctest::Approx(split.h0_norm_sq + split.h1_norm_sq).epsilon(1e-10));
  CHECK(std::abs(model.evaluate(split.h1, Point{})) < 1e-12);

  const CrossSplit zero = decompose_cross(model, CrossData({0.0, 1.0}, {0.0, 0.0, 1.0}));
  CHECK(zero.h0.norm() == 0.0);
}

TEST_CASE("cross estimate for flat data") {
  const BergmanModel model = build_model(Weight(Domain::bidisk), 4, bidisk());
  const DiskRule v = branch_rule();
  const CrossEstimate c = rhs_estimate_cross(model, CrossData({1.0}, {1.0}), v);
  CHECK(c.total == doctest::Approx(kPi * kPi).epsilon(1e-10));
  CHECK(c.branch_terms[0] < 1e-20);
  const CrossEstimate s = rhs_estimate_cross(model, CrossData({0.0, 1.0}, {0.0, 1.0}), v);
  CHECK(s.point_term == 0.0);
  CHECK(s.branch_terms[0] == doctest::Approx(kPi).epsilon(1e-8));
  CHECK(s.total == doctest::Approx(2 * kPi).epsilon(1e-8));
}

TEST_CASE("cross extension is stationary and norms decrease with degree") {
  const CrossData data({1.0, Complex{0.0, 1.0}, 0.5}, {1.0, -2.0});
  double previous = std::numeric_limits<double>::infinity();
  for (int d : {2, 3, 5, 7}) {
    const BergmanModel model = build_model(harmonic_bidisk(), d, bidisk());
    const ExtensionReport r = extend_cross(model, data);
    CHECK(r.norm_sq <= previous * (1 + 1e-10));
    previous = r.norm_sq;
    // Perturbing a free mixed coefficient raises the norm.
    Vector c = r.coefficients;
    const Eigen::Index mixed = model.index_of(Monomial{1, 1});
    c(mixed) += 1e-3;
    CHECK(model.norm_sq(c) > r.norm_sq);
  }
}

TEST_CASE("cross argument errors") {
  CHECK_THROWS_AS(CrossData({1.0}, {2.0}), ParameterError);
  const BergmanModel model = build_model(Weight(Domain::bidisk), 2, bidisk());
  CHECK_THROWS_AS(extend_cross(model, CrossData({1.0, 0.0, 0.0, 1.0}, {1.0})), ParameterError);
  const BergmanModel d = build_model(Weight(Domain::disk), 2, disk());
  CHECK_THROWS_AS(extend_cross(d, CrossData({1.0}, {1.0})), ParameterError);
}

TEST_CASE("extension report JSON") {
  const BergmanModel model = build_model(Weight(Domain::disk), 6, disk());
  const nlohmann::json j = extend_jet_recursive(model, Jet{{1.0, 2.0}}).to_json();
  CHECK(j.at("norm_sq").get<double>() == doctest::Approx(kPi + 2 * kPi));
  CHECK(j.at("levels").size() == 2);
  CHECK(j.at("coefficients").size() == 2);
  CHECK(j.contains("diagnostics"));
}
