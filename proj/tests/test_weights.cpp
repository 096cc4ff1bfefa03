#include <doctest.h>

#include <cmath>
#include <random>

#include "bergext/weights.hpp"

using namespace bergext;

namespace {

Weight diagonal_log() {
  return Weight::structured(Domain::bidisk, {LogTerm{1.0, Poly::parse("z1 - z2")}}, Poly(Poly::Kind::real));
}

Weight regularized(double eps, Regularization kind = Regularization::convolution) {
  return Weight::regularized(Domain::bidisk, {eps, Poly::parse("z1 - z2"), kind});
}

// e^phi d/dz (e^{-phi} f) by central differences in x and y of the first variable.
Complex twisted_fd(const Weight& w, const Poly& f, Point p, double h = 1e-5) {
  auto g = [&](Complex dz) {
    Point q = p;
    q[0] += dz;
    return std::exp(-w.value(q)) * f(q);
  };
  const Complex dx = (g(h) - g(-h)) / (2 * h);
  const Complex dy = (g(Complex{0, h}) - g(Complex{0, -h})) / (2 * h);
  return std::exp(w.value(p)) * 0.5 * (dx - Complex{0, 1} * dy);
}

}  // namespace

TEST_CASE("eval_weight examples") {
  CHECK(eval_weight(Weight::linear_re(3), Complex{}).value == 0.0);
  const WeightValue v = eval_weight(diagonal_log(), Point{Complex{0.5}, Complex{0.1}});
  CHECK_FALSE(v.singular);
  CHECK(std::abs(v.value - std::log(0.16)) < 1e-14);
  const Weight pole = Weight::structured(Domain::disk, {LogTerm{1.0, Poly::parse("z")}}, Poly(Poly::Kind::real));
  const WeightValue s = eval_weight(pole, Complex{});
  CHECK(s.singular);
  CHECK(s.value == -std::numeric_limits<double>::infinity());
  CHECK(std::isinf(pole.density(Point{})));
}

TEST_CASE("linear weight matches -2m Re z") {
  const Weight w = Weight::linear_re(2.5);
  const Complex z{0.3, -0.7};
  CHECK(std::abs(w.value(Point{z, 0.0}) + 5.0 * z.real()) < 1e-14);
  CHECK(std::abs(w.dz(Point{z, 0.0})[0] - Complex{-2.5}) < 1e-14);
}

TEST_CASE("clamp_max examples") {
  const Weight psi = clamp_max(Weight(Domain::disk), 0.1, 10.0);
  CHECK(psi.value(Point{}) == -10.0);
  CHECK(std::abs(psi.value(Point{Complex{1.0}, 0.0})) < 1e-15);
  const double r = std::exp(-10.0 / 0.1 * 0.5);
  CHECK(std::abs(psi.dz(Point{Complex{0.5 * r}, 0.0})[0]) == 0.0);
  CHECK(std::abs(psi.value(Point{Complex{0.5 * r}, 0.0}) + 10.0) == 0.0);
}

TEST_CASE("clamp plateau radius") {
  const double m = 4.0, eps = 0.4, a = 20.0;
  const double r = clamp_plateau_radius(m, eps, a);
  const Weight psi = clamp_max(Weight::linear_re(m), eps, a);
  CHECK(psi.value(Point{Complex{0.99 * r}, 0.0}) == -a);
  CHECK(psi.value(Point{Complex{-1.01 * r}, 0.0}) > -a);
}

TEST_CASE("clamped weight lies above the base weight") {
  const Weight phi = Weight::linear_re(4);
  const Weight psi = clamp_max(phi, 0.05, 20.0);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.7, 0.7);
  for (int i = 0; i < 200; ++i) {
    const Point p{Complex{u(rng), u(rng)}, 0.0};
    CHECK(psi.density(p) <= phi.density(p) * std::pow(std::norm(p[0]), -0.05) * (1 + 1e-12));
  }
}

TEST_CASE("twisted derivative examples") {
  const Poly z1 = Poly::parse("z1");
  CHECK(std::abs(twisted_derivative(diagonal_log(), z1, Point{Complex{0.3}, 0.0}, 0)) < 1e-15);
  const Complex v = twisted_derivative(regularized(0.2), z1, Point{Complex{0.1}, 0.0}, 0);
  CHECK(std::abs(v - Complex{0.75}) < 1e-14);
  const Poly zero(Poly::Kind::holomorphic);
  CHECK(twisted_derivative(Weight::linear_re(2), zero, Point{Complex{0.2, 0.1}, 0.0}, 0) == Complex{});
  CHECK_THROWS_AS(twisted_derivative(diagonal_log(), z1, Point{Complex{0.3}, Complex{0.3}}, 0), SingularPointError);
}

TEST_CASE("twisted derivative matches finite differences") {
  const Poly f = Poly::parse("1 + 2*z1 - 0.5i*z1^2");
  const std::vector<std::pair<Weight, Point>> cases = {
      {Weight::linear_re(2), Point{Complex{0.2, -0.3}, 0.0}},
      {regularized(0.2), Point{Complex{0.1, 0.05}, 0.0}},
      {regularized(0.2), Point{Complex{0.5, 0.2}, Complex{0.1}}},
      {regularized(0.1, Regularization::additive), Point{Complex{0.05, -0.02}, 0.0}},
      {Weight::structured(Domain::disk, {}, Poly::parse("x^2 + y^2 - x*y", Poly::Kind::real)),
       Point{Complex{0.4, 0.1}, 0.0}},
  };
  for (const auto& [w, p] : cases) {
    const Complex exact = twisted_derivative(w, f, p, 0);
    const Complex fd = twisted_fd(w, f, p);
    CHECK(std::abs(exact - fd) <= 1e-6 * std::abs(exact));
  }
}

TEST_CASE("regularized log weight") {
  for (double eps : {0.05, 0.2, 0.5}) {
    const Weight w = regularized(eps);
    // Continuity across |zeta| = eps.
    for (double t : {0.0, 1.0, 2.5}) {
      const Complex dir = std::polar(1.0, t);
      const double in = w.value(Point{eps * (1 - 1e-13) * dir, 0.0});
      const double out = w.value(Point{eps * (1 + 1e-13) * dir, 0.0});
      CHECK(std::abs(in - out) < 1e-12);
    }
    CHECK(std::abs(w.value(Point{}) - (std::log(eps * eps) - 1.0)) < 1e-14);
  }
  // Decreasing to log|zeta|^2 as eps decreases.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  for (int i = 0; i < 100; ++i) {
    const Point p{Complex{u(rng), u(rng)}, Complex{u(rng), u(rng)}};
    double previous = std::numeric_limits<double>::infinity();
    for (double eps : {0.8, 0.4, 0.2, 0.1, 0.05, 0.025}) {
      const double v = regularized(eps).value(p);
      CHECK(v <= previous + 1e-15);
      previous = v;
    }
    CHECK(previous >= diagonal_log().value(p) - 1e-15);
  }
}

TEST_CASE("sampled Laplacian of subharmonic weights") {
  CHECK(sampled_min_laplacian(Weight::linear_re(4)) >= -1e-6);
  CHECK(sampled_min_laplacian(clamp_max(Weight::linear_re(2), 0.2, 5.0)) >= -1e-6);
  CHECK(sampled_min_laplacian(regularized(0.1)) >= -1e-6);
  const Weight fs = Weight::structured(Domain::bidisk, {}, Poly(Poly::Kind::real), SmoothForm::fubini_study);
  CHECK(sampled_min_laplacian(fs) >= -1e-6);
  const Weight concave = Weight::structured(Domain::disk, {}, Poly::parse("-x^2", Poly::Kind::real), SmoothForm::none, false);
  CHECK(sampled_min_laplacian(concave) < -1.0);
}

TEST_CASE("weight JSON round trip") {
  const std::vector<Weight> ws = {
      Weight::linear_re(3),
      diagonal_log(),
      regularized(0.1),
      regularized(0.1, Regularization::additive),
      clamp_max(Weight::linear_re(4), 0.05, 20.0),
  };
  const Point p{Complex{0.31, -0.2}, Complex{0.1, 0.4}};
  for (const Weight& w : ws) {
    const Weight back = Weight::from_json(w.to_json());
    CHECK(back.domain() == w.domain());
    CHECK(back.value(p) == doctest::Approx(w.value(p)).epsilon(1e-15));
  }
  CHECK_THROWS_AS(Weight::from_json(nlohmann::json::parse(R"({"domain":"torus"})")), ParameterError);
}

TEST_CASE("cutoff examples") {
  CutoffFamily rho;
  rho.kind = CutoffKind::rho_eps;
  rho.epsilon = 0.3;
  const double e2 = 0.09;
  CHECK(cutoff_eval(rho, Point{Complex{std::sqrt(0.5 * e2)}, 0.0}).value == 1.0);
  CHECK(cutoff_eval(rho, Point{Complex{std::sqrt(3.0 * e2)}, 0.0}).value == 0.0);
  const double mid = cutoff_eval(rho, Point{Complex{std::sqrt(1.5 * e2)}, 0.0}).value;
  CHECK(mid == doctest::Approx(0.5));

  CutoffFamily xi;
  xi.kind = CutoffKind::xi_eps;
  const Complex z{0.3, 0.2};
  const double eps_star = xi_unit_threshold(std::abs(z));
  for (double eps : {eps_star, 0.5 * eps_star, 0.01 * eps_star}) {
    xi.epsilon = eps;
    CHECK(cutoff_eval(xi, Point{z, 0.0}).value == 1.0);
  }
  xi.epsilon = eps_star * 4.0;
  CHECK(cutoff_eval(xi, Point{z, 0.0}).value < 1.0);
  xi.epsilon = 0.3;
  CHECK(cutoff_eval(xi, Point{Complex{1.2}, 0.0}).value == 1.0);
  CHECK(cutoff_eval(xi, Point{}).value == 0.0);
}

TEST_CASE("cutoff derivative matches finite differences") {
  CutoffFamily c;
  c.kind = CutoffKind::rho_eps;
  c.epsilon = 0.4;
  c.section = Poly::parse("z1^2 + 0.1*z1");
  const Point p{Complex{0.6, 0.15}, 0.0};
  const CutoffValue v = cutoff_eval(c, p, true);
  const double h = 1e-6;
  auto at = [&](Complex d) { return cutoff_eval(c, Point{p[0] + d, 0.0}).value; };
  const Complex fd = 0.5 * ((at(h) - at(-h)) / (2 * h) - Complex{0, 1} * (at(Complex{0, h}) - at(Complex{0, -h})) / (2 * h));
  CHECK(std::abs(v.dz[0] - fd) < 1e-6 * std::max(1.0, std::abs(fd)));
  CHECK(std::abs(v.dz[0]) > 0.1);
}

TEST_CASE("cutoff gradient energy decays along eps = 1/2, 1/4, 1/8, 1/16") {
  // Closed form: 4 pi e^{-1/eps} integral_0^1 36 s^2 (1-s)^2 e^{-s} ds, by Simpson.
  auto closed = [](double eps) {
    const int n = 2000;
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double x = static_cast<double>(i) / n;
      const double f = 36.0 * x * x * (1 - x) * (1 - x) * std::exp(-x);
      s += f * (i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0));
    }
    return 4.0 * kPi * std::exp(-1.0 / eps) * s / (3.0 * n);
  };
  std::vector<double> values;
  for (double eps : {0.5, 0.25, 0.125, 0.0625}) {
    const double v = xi_gradient_energy(eps);
    CHECK(v == doctest::Approx(closed(eps)).epsilon(1e-10));
    values.push_back(v);
  }
  for (std::size_t i = 1; i < values.size(); ++i) CHECK(values[i] < values[i - 1]);
  CHECK(values.back() < 0.5 * values.front());

  // Direct disk integrals of |d Xi|^2 where the transition is representable.
  CutoffFamily xi;
  xi.kind = CutoffKind::xi_eps;
  DiskRuleSpec s;
  s.radial_order = 32;
  s.angular_order = 8;
  s.grading_ratio = 0.1;
  s.annuli = 40;
  const DiskRule rule(s);
  for (double eps : {0.5, 0.25}) {
    xi.epsilon = eps;
    CHECK(cutoff_gradient_energy(xi, rule) == doctest::Approx(closed(eps)).epsilon(1e-3));
  }
}
