#include "bergext/extension.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace bergext {

CrossData::CrossData(std::vector<Complex> f1, std::vector<Complex> f2) : f1_(std::move(f1)), f2_(std::move(f2)) {
  if (f1_.empty()) f1_.push_back(0.0);
  if (f2_.empty()) f2_.push_back(0.0);
  if (f1_.front() != f2_.front()) throw ParameterError("CrossData: f1(0) must equal f2(0)");
}

int CrossData::degree() const {
  auto top = [](const std::vector<Complex>& v) {
    int d = 0;
    for (std::size_t n = 0; n < v.size(); ++n)
      if (v[n] != Complex{}) d = static_cast<int>(n);
    return d;
  };
  return std::max(top(f1_), top(f2_));
}

double CrossData::norm() const {
  double s = 0.0;
  for (const Complex& c : f1_) s += std::norm(c);
  for (std::size_t n = 1; n < f2_.size(); ++n) s += std::norm(f2_[n]);
  return std::sqrt(s);
}

namespace {

double factorial(int k) {
  double f = 1.0;
  for (int j = 2; j <= k; ++j) f *= j;
  return f;
}

double vector_norm(const std::vector<Complex>& v) {
  double s = 0.0;
  for (const Complex& c : v) s += std::norm(c);
  return std::sqrt(s);
}

void require_disk(const BergmanModel& model, const Jet& jet, const char* who) {
  if (model.domain() != Domain::disk) throw ParameterError(std::string(who) + ": jets are defined on the disk");
  if (jet.size() < 1) throw ParameterError(std::string(who) + ": jet must have at least one value");
  if (static_cast<int>(jet.size()) > model.degree() + 1)
    throw ParameterError(std::string(who) + ": jet length exceeds degree + 1");
}

ExtensionReport base_report(const BergmanModel& model) {
  ExtensionReport r;
  r.domain = model.domain();
  r.basis = model.basis();
  r.condition_number = model.condition_number();
  r.warnings = model.warnings();
  return r;
}

}  // namespace

Matrix jet_constraints(const BergmanModel& model, int n_derivatives) {
  Matrix l = Matrix::Zero(n_derivatives, model.dimension());
  for (int k = 0; k < n_derivatives; ++k) {
    const Eigen::Index idx = model.index_of({k, 0});
    if (idx < 0) throw ParameterError("jet_constraints: derivative order exceeds the basis");
    l(k, idx) = factorial(k);
  }
  return l;
}

double stationarity_residual(const BergmanModel& model, const Vector& coeffs, const Matrix& constraints) {
  const Vector g = model.gram() * coeffs;
  const double gn = g.norm();
  if (gn == 0.0) return 0.0;
  // Remove the component of g in range(L*); what is left lies in null(L).
  const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(constraints.adjoint());
  const Vector in_range = constraints.adjoint() * cod.solve(g);
  return (g - in_range).norm() / gn;
}

ExtensionReport extend_jet_direct(const BergmanModel& model, const Jet& jet) {
  require_disk(model, jet, "extend_jet_direct");
  const auto n = static_cast<int>(jet.size());
  const Matrix l = jet_constraints(model, n);
  const Matrix representers = model.factor().solve(Matrix(l.adjoint()));  // H^{-1} L*
  const Matrix k = l * representers;
  Vector a(n);
  for (int i = 0; i < n; ++i) a(i) = jet.values[static_cast<std::size_t>(i)];

  ExtensionReport r = base_report(model);
  r.data_norm = vector_norm(jet.values);
  HermitianFactor kf;
  try {
    kf = HermitianFactor(k);
  } catch (const DegeneracyError& e) {
    throw DegeneracyError(std::string("extend_jet_direct: representer system is singular; the weight's multiplier "
                                      "ideal kills the jet (") + e.what() + ")");
  }
  r.representer_condition = kf.scaled_condition();
  const Vector lambda = kf.solve(a);
  r.coefficients = representers * lambda;
  r.norm_sq = (a.adjoint() * lambda)(0, 0).real();
  r.constraint_residual = (l * r.coefficients - a).norm();
  return r;
}

ExtensionReport extend_jet_recursive(const BergmanModel& model, const Jet& jet) {
  require_disk(model, jet, "extend_jet_recursive");
  const auto n_levels = static_cast<int>(jet.size());
  const Eigen::Index dim = model.dimension();
  ExtensionReport r = base_report(model);
  r.data_norm = vector_norm(jet.values);
  r.coefficients = Vector::Zero(dim);

  for (int k = 0; k < n_levels; ++k) {
    // Minimal element f of E_k with f^{(k)}(0) = 1; it spans E_k minus E_{k+1}
    // and has ||f||^2 = 1 / B_k(0).
    const Eigen::Index len = dim - k;
    const HermitianFactor sub(model.gram().block(k, k, len, len));
    Vector delta = Vector::Zero(len);
    delta(0) = 1.0;
    const Vector col = sub.solve(delta);  // H_k^{-1} delta
    const double hinv_kk = col(0).real();
    const double bk = factorial(k) * factorial(k) * hinv_kk;
    Vector f = Vector::Zero(dim);
    f.tail(len) = col / (factorial(k) * hinv_kk);

    const Complex b = jet.values[static_cast<std::size_t>(k)] - factorial(k) * r.coefficients(k);
    r.coefficients += b * f;
    r.levels.push_back({k, b, bk, std::norm(b) / bk});
  }
  r.norm_sq = 0.0;
  for (const LevelTerm& t : r.levels) r.norm_sq += t.norm_sq;

  const Matrix l = jet_constraints(model, n_levels);
  Vector a(n_levels);
  for (int i = 0; i < n_levels; ++i) a(i) = jet.values[static_cast<std::size_t>(i)];
  r.constraint_residual = (l * r.coefficients - a).norm();
  return r;
}

JetEstimate rhs_estimate_jet(const BergmanModel& model, const Jet& jet) {
  if (model.domain() != Domain::disk) throw ParameterError("rhs_estimate_jet: disk models only");
  if (jet.size() != 2) throw ParameterError("rhs_estimate_jet: jet must have length 2");
  if (model.degree() < 1) throw ParameterError("rhs_estimate_jet: degree must be >= 1");
  JetEstimate e;
  const Complex a0 = jet.values[0];
  const Complex a1 = jet.values[1];
  e.gradient = log_kernel_gradient_at_zero(model);
  e.omega_b = bergman_metric_at_zero(model);
  const double bracket = std::norm(a0) + std::norm(a1 - a0 * e.gradient) / e.omega_b;
  e.exact = bracket / higher_kernel(model, 0);
  const WeightValue phi0 = model.weight().evaluate(Point{});
  e.ot_style = phi0.singular ? std::numeric_limits<double>::infinity() : bracket * std::exp(-phi0.value);
  return e;
}

ExtensionReport extend_cross(const BergmanModel& model, const CrossData& data) {
  if (model.domain() != Domain::bidisk) throw ParameterError("extend_cross: bidisk models only");
  const int d = model.degree();
  if (data.degree() > d) {
    std::ostringstream os;
    os << "extend_cross: data degree " << data.degree() << " exceeds model degree " << d;
    throw ParameterError(os.str());
  }
  const Eigen::Index dim = model.dimension();
  Vector fixed_values = Vector::Zero(dim);
  std::vector<bool> is_fixed(static_cast<std::size_t>(dim), false);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const Monomial& m = model.basis()[static_cast<std::size_t>(i)];
    if (m.a == 0) {
      is_fixed[static_cast<std::size_t>(i)] = true;
      if (static_cast<std::size_t>(m.b) < data.f1().size()) fixed_values(i) = data.f1()[static_cast<std::size_t>(m.b)];
    } else if (m.b == 0) {
      is_fixed[static_cast<std::size_t>(i)] = true;
      if (static_cast<std::size_t>(m.a) < data.f2().size()) fixed_values(i) = data.f2()[static_cast<std::size_t>(m.a)];
    }
  }
  std::vector<Eigen::Index> fixed_idx;
  std::vector<Eigen::Index> free_idx;
  for (Eigen::Index i = 0; i < dim; ++i) (is_fixed[static_cast<std::size_t>(i)] ? fixed_idx : free_idx).push_back(i);

  const auto nx = static_cast<Eigen::Index>(fixed_idx.size());
  const auto nf = static_cast<Eigen::Index>(free_idx.size());
  Vector cx(nx);
  for (Eigen::Index i = 0; i < nx; ++i) cx(i) = fixed_values(fixed_idx[static_cast<std::size_t>(i)]);

  ExtensionReport r = base_report(model);
  r.data_norm = data.norm();
  r.coefficients = fixed_values;
  if (nf > 0) {
    Matrix hff(nf, nf);
    Matrix hfx(nf, nx);
    for (Eigen::Index i = 0; i < nf; ++i) {
      for (Eigen::Index j = 0; j < nf; ++j)
        hff(i, j) = model.gram()(free_idx[static_cast<std::size_t>(i)], free_idx[static_cast<std::size_t>(j)]);
      for (Eigen::Index j = 0; j < nx; ++j)
        hfx(i, j) = model.gram()(free_idx[static_cast<std::size_t>(i)], fixed_idx[static_cast<std::size_t>(j)]);
    }
    HermitianFactor ff;
    try {
      ff = HermitianFactor(hff);
    } catch (const DegeneracyError& e) {
      throw DegeneracyError(std::string("extend_cross: mixed-coefficient block is singular (") + e.what() + ")");
    }
    r.representer_condition = ff.scaled_condition();
    const Vector cf = -ff.solve(Vector(hfx * cx));
    for (Eigen::Index i = 0; i < nf; ++i) r.coefficients(free_idx[static_cast<std::size_t>(i)]) = cf(i);
  }
  r.norm_sq = model.norm_sq(r.coefficients);

  double residual = 0.0;
  for (Eigen::Index i = 0; i < nx; ++i) {
    const Eigen::Index idx = fixed_idx[static_cast<std::size_t>(i)];
    residual += std::norm(r.coefficients(idx) - fixed_values(idx));
  }
  r.constraint_residual = std::sqrt(residual);

  // h0 = a0 H^{-1} delta_0 / (H^{-1})_00 is the component orthogonal to E_1.
  const Eigen::Index i0 = model.index_of({0, 0});
  Vector delta = Vector::Zero(dim);
  delta(i0) = 1.0;
  const Vector col = model.solve(delta);
  CrossSplit split;
  split.h0 = data.a0() * col / col(i0).real();
  split.h1 = r.coefficients - split.h0;
  split.h0_norm_sq = model.norm_sq(split.h0);
  split.h1_norm_sq = model.norm_sq(split.h1);
  split.pythagoras_defect =
      r.norm_sq > 0.0 ? std::abs(r.norm_sq - split.h0_norm_sq - split.h1_norm_sq) / r.norm_sq : 0.0;
  r.cross = split;
  return r;
}

CrossSplit decompose_cross(const BergmanModel& model, const CrossData& data) {
  return *extend_cross(model, data).cross;
}

CrossEstimate rhs_estimate_cross(const BergmanModel& model, const CrossData& data, const DiskRule& rule_on_v) {
  if (model.domain() != Domain::bidisk) throw ParameterError("rhs_estimate_cross: bidisk models only");
  const CrossSplit split = decompose_cross(model, data);
  CrossEstimate e;
  e.point_term = std::norm(data.a0()) / higher_kernel(model, 0);
  const double tol = 1e-8 * (1.0 + std::abs(data.a0()));

  for (int branch = 0; branch < 2; ++branch) {
    // Branch 0 is V1 = {z1 = 0} (variable z2); branch 1 is V2 = {z2 = 0} (variable z1).
    const std::vector<Complex>& f = branch == 0 ? data.f1() : data.f2();
    std::vector<Complex> g(static_cast<std::size_t>(model.degree()) + 1, Complex{});
    for (std::size_t n = 0; n < f.size(); ++n) g[n] += f[n];
    for (Eigen::Index i = 0; i < model.dimension(); ++i) {
      const Monomial& m = model.basis()[static_cast<std::size_t>(i)];
      const int along = branch == 0 ? m.b : m.a;
      const int across = branch == 0 ? m.a : m.b;
      if (across == 0) g[static_cast<std::size_t>(along)] -= split.h0(i);
    }
    if (std::abs(g[0]) > tol) {
      std::ostringstream os;
      os << "rhs_estimate_cross: f - h0 does not vanish at the origin on branch V" << (branch + 1)
         << " (|value| = " << std::abs(g[0]) << "); the branch integral diverges";
      throw DivergenceError(os.str());
    }
    g.erase(g.begin());  // divide by the branch variable
    const Poly q = Poly::univariate(g, 0);
    const Weight& w = model.weight();
    const ProbedIntegral pi = integrate_probed(rule_on_v, [&](Complex z) {
      const Point p = branch == 0 ? Point{Complex{}, z} : Point{z, Complex{}};
      return std::norm(q(z)) * w.density(p);
    });
    if (pi.divergent) {
      std::ostringstream os;
      os << "rhs_estimate_cross: branch V" << (branch + 1) << " integral fails the integrability probe (shell rate "
         << pi.shell_rate << ")";
      throw DivergenceError(os.str());
    }
    e.branch_terms[branch] = pi.value;
  }
  e.total = e.point_term + e.branch_terms[0] + e.branch_terms[1];
  return e;
}

nlohmann::json ExtensionReport::to_json() const {
  nlohmann::json j;
  j["domain"] = bergext::to_string(domain);
  j["norm_sq"] = norm_sq;
  nlohmann::json coeffs = nlohmann::json::array();
  const double cutoff = 1e-13 * (coefficients.size() > 0 ? coefficients.cwiseAbs().maxCoeff() : 0.0);
  for (Eigen::Index i = 0; i < coefficients.size(); ++i) {
    const Complex c = coefficients(i);
    if (std::abs(c) <= cutoff) continue;
    const Monomial& m = basis[static_cast<std::size_t>(i)];
    coeffs.push_back({{"monomial", bergext::to_string(m, domain)}, {"re", c.real()}, {"im", c.imag()}});
  }
  j["coefficients"] = coeffs;
  if (!levels.empty()) {
    nlohmann::json lv = nlohmann::json::array();
    for (const LevelTerm& t : levels)
      lv.push_back({{"k", t.k}, {"b_re", t.b.real()}, {"b_im", t.b.imag()}, {"B_k", t.bergman}, {"norm_sq", t.norm_sq}});
    j["levels"] = lv;
  }
  if (cross) {
    j["h0_norm_sq"] = cross->h0_norm_sq;
    j["h1_norm_sq"] = cross->h1_norm_sq;
    j["pythagoras_defect"] = cross->pythagoras_defect;
  }
  j["diagnostics"] = {{"constraint_residual", constraint_residual},
                      {"data_norm", data_norm},
                      {"condition_number", condition_number},
                      {"representer_condition", representer_condition},
                      {"warnings", warnings}};
  return j;
}

}  // namespace bergext
