#include <doctest.h>

#include <cmath>
#include <random>

#ifdef BERGEXT_HAVE_OPENMP
#include <omp.h>
#endif

#include "bergext/bergman.hpp"

using namespace bergext;

namespace {

const DiskRule& default_rule() {
  static const DiskRule rule{DiskRuleSpec{}};
  return rule;
}

double factorial(int k) { return std::tgamma(k + 1.0); }

}  // namespace

TEST_CASE("Gram matrix of the flat weight is diagonal") {
  const BergmanModel model = build_model(Weight(Domain::disk), 3, default_rule());
  const Matrix& h = model.gram();
  for (Eigen::Index m = 0; m < 4; ++m) {
    for (Eigen::Index n = 0; n < 4; ++n) {
      const Complex expected = m == n ? Complex{kPi / static_cast<double>(n + 1)} : Complex{};
      CHECK(std::abs(h(m, n) - expected) < 1e-10);
    }
  }
}

TEST_CASE("non-integrable monomials are named") {
  const Weight pole = Weight::structured(Domain::disk, {LogTerm{1.0, Poly::parse("z")}}, Poly(Poly::Kind::real));
  try {
    (void)build_model(pole, 4, default_rule());
    FAIL("expected DegeneracyError");
  } catch (const DegeneracyError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("z^0") != std::string::npos);
    CHECK(msg.find("z^1") == std::string::npos);
  }
}

TEST_CASE("Gram matrix is Hermitian positive definite") {
  const BergmanModel model = build_model(Weight::linear_re(1), 8, default_rule());
  CHECK(hermitian_defect(assemble_gram(Weight::linear_re(1), model.basis(), default_rule())) < 1e-14);
  CHECK(model.min_eigenvalue() > 0.0);
  const Matrix& c = model.orthonormal_coeffs();
  const Matrix id = c.adjoint() * model.gram() * c;
  CHECK((id - Matrix::Identity(id.rows(), id.cols())).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("flat kernel values") {
  const BergmanModel model = build_model(Weight(Domain::disk), 40, default_rule());
  CHECK(std::abs(kernel(model, Complex{}, Complex{}) - 1.0 / kPi) < 1e-10);
  const Complex z{0.5};
  CHECK(std::abs(kernel(model, z, z) - 16.0 / (9.0 * kPi)) < 1e-8);
  const Complex a{0.3, 0.1}, b{-0.2, 0.4};
  CHECK(std::abs(kernel(model, a, b) - std::conj(kernel(model, b, a))) < 1e-12);
  CHECK(std::abs(kernel(model, a, b) - 1.0 / (kPi * std::pow(1.0 - a * std::conj(b), 2))) < 1e-8);
}

TEST_CASE("higher kernels of the flat weight") {
  const BergmanModel model = build_model(Weight(Domain::disk), 12, default_rule());
  for (int k = 0; k <= 6; ++k) {
    const double exact = factorial(k) * factorial(k) * (k + 1) / kPi;
    CHECK(higher_kernel(model, k) == doctest::Approx(exact).epsilon(1e-10));
  }
  CHECK(bergman_metric_at_zero(model) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(bergman_metric_stencil(model) == doctest::Approx(2.0).epsilon(1e-5));
  CHECK(std::abs(log_kernel_gradient_at_zero(model)) < 1e-12);
}

TEST_CASE("metric stencil matches the extremal ratio") {
  for (double m : {1.0, 2.0, 3.0}) {
    const BergmanModel model = build_model(Weight::linear_re(m), 14, default_rule());
    CHECK(bergman_metric_stencil(model) == doctest::Approx(bergman_metric_at_zero(model)).epsilon(1e-5));
  }
}

TEST_CASE("kernel gradient grows with m") {
  double previous = 0.0;
  for (double m : {0.5, 1.0, 2.0, 4.0}) {
    const BergmanModel model = build_model(Weight::linear_re(m), 20, default_rule());
    const double g = std::abs(log_kernel_gradient_at_zero(model));
    CHECK(g > previous);
    previous = g;
  }
}

TEST_CASE("rotating the weight rotates the kernel") {
  // phi(z) = x^2 - y^2 + x; phi(-i z) = y^2 - x^2 + y.
  const Weight w = Weight::structured(Domain::disk, {}, Poly::parse("x^2 - y^2 + x", Poly::Kind::real));
  const Weight r = Weight::structured(Domain::disk, {}, Poly::parse("y^2 - x^2 + y", Poly::Kind::real));
  const BergmanModel mw = build_model(w, 16, default_rule());
  const BergmanModel mr = build_model(r, 16, default_rule());
  const Complex rot{0.0, -1.0};
  for (const auto& [a, b] : {std::pair{Complex{0.2, 0.1}, Complex{-0.3, 0.2}}, std::pair{Complex{}, Complex{0.4}}}) {
    const Complex lhs = kernel(mr, a, b);
    const Complex rhs = kernel(mw, rot * a, rot * b);
    CHECK(std::abs(lhs - rhs) < 1e-9 * std::abs(rhs));
  }
}

TEST_CASE("reproducing property on the span") {
  const Weight w = Weight::linear_re(2);
  const BergmanModel model = build_model(w, 10, default_rule());
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n01;
  Vector c(model.dimension());
  for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = Complex{n01(rng), n01(rng)};
  const Complex at{0.25, -0.3};
  const Complex pairing = integrate(default_rule(), [&](Complex z) {
    return model.evaluate(c, Point{z, Complex{}}) * std::conj(kernel(model, z, at)) *
           w.density(Point{z, Complex{}});
  });
  const Complex value = model.evaluate(c, Point{at, Complex{}});
  CHECK(std::abs(pairing - value) < 1e-9 * std::abs(value));
}

TEST_CASE("truncated B_0 is nondecreasing in the degree") {
  double previous = 0.0;
  for (int d : {2, 4, 8, 12, 16}) {
    const BergmanModel model = build_model(Weight::linear_re(2), d, default_rule());
    const double b0 = higher_kernel(model, 0);
    CHECK(b0 >= previous * (1 - 1e-12));
    previous = b0;
  }
}

TEST_CASE("B_k is the supremum over E_k") {
  const BergmanModel model = build_model(Weight::linear_re(1.5), 10, default_rule());
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  for (int k = 0; k <= 3; ++k) {
    const double bk = higher_kernel(model, k);
    const Eigen::Index tail = model.dimension() - k;
    const Matrix hk = model.gram().bottomRightCorner(tail, tail);
    for (int trial = 0; trial < 200; ++trial) {
      Vector c = Vector::Zero(model.dimension());
      for (Eigen::Index i = k; i < c.size(); ++i) c(i) = Complex{n01(rng), n01(rng)};
      const double ratio = std::norm(factorial(k) * c(k)) / model.norm_sq(c);
      CHECK(ratio <= bk * (1 + 1e-10));
    }
    // The extremal element is H_k^{-1} e_k restricted to E_k.
    Vector ek = Vector::Zero(tail);
    ek(0) = 1.0;
    const Vector sub = hk.ldlt().solve(ek);
    Vector c = Vector::Zero(model.dimension());
    c.tail(tail) = sub;
    const double ratio = std::norm(factorial(k) * c(k)) / model.norm_sq(c);
    CHECK(ratio == doctest::Approx(bk).epsilon(1e-9));
  }
}

TEST_CASE("parallel and serial Gram assembly agree") {
  const Weight w = clamp_max(Weight::linear_re(3), 0.1, 10.0);
  const auto basis = make_basis(Domain::disk, 10, BidiskBasis::tensor);
  const Matrix p = assemble_gram(w, basis, default_rule());
  const Matrix s = assemble_gram_serial(w, basis, default_rule());
  CHECK((p - s).cwiseAbs().maxCoeff() <= 1e-13 * s.cwiseAbs().maxCoeff());
#ifdef BERGEXT_HAVE_OPENMP
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const Matrix one = assemble_gram(w, basis, default_rule());
  omp_set_num_threads(3);
  const Matrix three = assemble_gram(w, basis, default_rule());
  omp_set_num_threads(saved);
  CHECK(one == three);
  CHECK(one == p);
#endif
}

TEST_CASE("bidisk flat kernel at the origin") {
  DiskRuleSpec s;
  s.radial_order = 16;
  s.angular_order = 32;
  s.annuli = 1;
  s.grading_centers.clear();
  const BidiskRule rule(s, s, BidiskGrading::tensor);
  const BergmanModel model = build_model(Weight(Domain::bidisk), 3, rule);
  CHECK(higher_kernel(model, 0) == doctest::Approx(1.0 / (kPi * kPi)).epsilon(1e-10));
  CHECK_THROWS_AS((void)higher_kernel(model, 1), ParameterError);
  CHECK_THROWS_AS((void)build_model(Weight(Domain::disk), 3, rule), ParameterError);
}

TEST_CASE("model summary") {
  const BergmanModel model = build_model(Weight(Domain::disk), 8, default_rule());
  const nlohmann::json j = model_summary(model, 3);
  CHECK(j.at("degree") == 8);
  CHECK(j.dump().find("omega") != std::string::npos);
}
