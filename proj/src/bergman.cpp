#include "bergext/bergman.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "bergext/reduce.hpp"

namespace bergext {

std::string to_string(const Monomial& m, Domain domain) {
  std::ostringstream os;
  if (domain == Domain::disk) {
    os << "z^" << m.a;
  } else {
    os << "z1^" << m.a << "*z2^" << m.b;
  }
  return os.str();
}

std::vector<Monomial> make_basis(Domain domain, int degree, BidiskBasis basis) {
  if (degree < 0) throw ParameterError("make_basis: degree must be >= 0");
  std::vector<Monomial> out;
  if (domain == Domain::disk) {
    for (int n = 0; n <= degree; ++n) out.push_back({n, 0});
    return out;
  }
  for (int a = 0; a <= degree; ++a)
    for (int b = 0; b <= degree; ++b)
      if (basis == BidiskBasis::tensor || a + b <= degree) out.push_back({a, b});
  return out;
}

namespace {

constexpr std::size_t kBlock = 256;

struct GramAcc {
  Matrix h;
  std::ptrdiff_t bad = -1;

  GramAcc& operator+=(const GramAcc& o) {
    h += o.h;
    if (bad < 0) bad = o.bad;
    return *this;
  }
};

int max_exponent(const std::vector<Monomial>& basis, bool second) {
  int m = 0;
  for (const Monomial& mono : basis) m = std::max(m, second ? mono.b : mono.a);
  return m;
}

// (1, z, ..., z^n) into out.
void powers(Complex z, int n, Complex* out) {
  out[0] = 1.0;
  for (int k = 1; k <= n; ++k) out[k] = out[k - 1] * z;
}

[[noreturn]] void throw_density(std::ptrdiff_t index) {
  std::ostringstream os;
  os << "assemble_gram: e^{-phi} is not finite at quadrature node " << index
     << "; the weight is singular on the rule";
  throw DegeneracyError(os.str());
}

Matrix gram_disk(const Weight& weight, const std::vector<Monomial>& basis, const DiskRule& rule) {
  const int top = max_exponent(basis, false);
  const auto n = static_cast<Eigen::Index>(basis.size());
  const std::size_t blocks = (rule.size() + kBlock - 1) / kBlock;
  const GramAcc zero{Matrix::Zero(n, n)};
  GramAcc total = kernels::tree_reduce(blocks, zero, [&](std::size_t blk, GramAcc& acc) {
    const std::size_t begin = blk * kBlock;
    const std::size_t end = std::min(rule.size(), begin + kBlock);
    Matrix p(n, static_cast<Eigen::Index>(end - begin));
    std::vector<Complex> pw(static_cast<std::size_t>(top) + 1);
    for (std::size_t i = begin; i < end; ++i) {
      const Complex z = rule.nodes()[i];
      const double d = weight.density(Point{z, Complex{}});
      if (!std::isfinite(d)) {
        if (acc.bad < 0) acc.bad = static_cast<std::ptrdiff_t>(i);
        p.col(static_cast<Eigen::Index>(i - begin)).setZero();
        continue;
      }
      const double s = std::sqrt(rule.weights()[i] * d);
      powers(z, top, pw.data());
      for (Eigen::Index k = 0; k < n; ++k)
        p(k, static_cast<Eigen::Index>(i - begin)) = s * pw[static_cast<std::size_t>(basis[static_cast<std::size_t>(k)].a)];
    }
    acc.h.noalias() += p.conjugate() * p.transpose();
  });
  if (total.bad >= 0) throw_density(total.bad);
  return total.h;
}

Matrix gram_bidisk(const Weight& weight, const std::vector<Monomial>& basis, const BidiskRule& rule) {
  const int top1 = max_exponent(basis, false);
  const int top2 = max_exponent(basis, true);
  const auto n = static_cast<Eigen::Index>(basis.size());
  const DiskRule& outer = rule.outer();
  const GramAcc zero{Matrix::Zero(n, n)};
  GramAcc total = kernels::tree_reduce(outer.size(), zero, [&](std::size_t o, GramAcc& acc) {
    const Complex z2 = outer.nodes()[o];
    const DiskRule inner = rule.inner_rule(o);
    const auto n1 = static_cast<Eigen::Index>(top1 + 1);
    Matrix m = Matrix::Zero(n1, n1);
    Matrix p(n1, static_cast<Eigen::Index>(kBlock));
    for (std::size_t begin = 0; begin < inner.size(); begin += kBlock) {
      const std::size_t end = std::min(inner.size(), begin + kBlock);
      p.setZero();
      for (std::size_t i = begin; i < end; ++i) {
        const Complex z1 = inner.nodes()[i];
        const double d = weight.density(Point{z1, z2});
        if (!std::isfinite(d)) {
          if (acc.bad < 0) acc.bad = static_cast<std::ptrdiff_t>(o);
          continue;
        }
        const double s = std::sqrt(inner.weights()[i] * d);
        Complex zk = s;
        const auto col = static_cast<Eigen::Index>(i - begin);
        for (Eigen::Index k = 0; k < n1; ++k) {
          p(k, col) = zk;
          zk *= z1;
        }
      }
      m.noalias() += p.conjugate() * p.transpose();
    }
    std::vector<Complex> q(static_cast<std::size_t>(top2) + 1);
    powers(z2, top2, q.data());
    const double wo = outer.weights()[o];
    for (Eigen::Index j = 0; j < n; ++j) {
      const Monomial& mj = basis[static_cast<std::size_t>(j)];
      const Complex qj = wo * q[static_cast<std::size_t>(mj.b)];
      for (Eigen::Index i = 0; i < n; ++i) {
        const Monomial& mi = basis[static_cast<std::size_t>(i)];
        acc.h(i, j) += m(mi.a, mj.a) * std::conj(q[static_cast<std::size_t>(mi.b)]) * qj;
      }
    }
  });
  if (total.bad >= 0) throw_density(total.bad);
  return total.h;
}

Complex monomial_value(const Monomial& m, const Point& p) {
  return std::pow(p[0], m.a) * std::pow(p[1], m.b);
}

}  // namespace

Matrix assemble_gram(const Weight& weight, const std::vector<Monomial>& basis, const Rule& rule) {
  if (const auto* disk = std::get_if<DiskRule>(&rule)) return gram_disk(weight, basis, *disk);
  return gram_bidisk(weight, basis, std::get<BidiskRule>(rule));
}

Matrix assemble_gram_serial(const Weight& weight, const std::vector<Monomial>& basis, const Rule& rule) {
  const auto n = static_cast<Eigen::Index>(basis.size());
  Matrix h = Matrix::Zero(n, n);
  Vector p(n);
  auto add_node = [&](const Point& pt, double w) {
    const double d = weight.density(pt);
    if (!std::isfinite(d)) throw_density(-1);
    for (Eigen::Index k = 0; k < n; ++k) {
      const Monomial& m = basis[static_cast<std::size_t>(k)];
      Complex v = 1.0;
      for (int e = 0; e < m.a; ++e) v *= pt[0];
      for (int e = 0; e < m.b; ++e) v *= pt[1];
      p(k) = v;
    }
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i) h(i, j) += w * d * p(j) * std::conj(p(i));
  };
  if (const auto* disk = std::get_if<DiskRule>(&rule)) {
    for (std::size_t i = 0; i < disk->size(); ++i) add_node(Point{disk->nodes()[i], Complex{}}, disk->weights()[i]);
    return h;
  }
  const auto& bi = std::get<BidiskRule>(rule);
  for (std::size_t o = 0; o < bi.outer().size(); ++o) {
    const DiskRule inner = bi.inner_rule(o);
    const Complex z2 = bi.outer().nodes()[o];
    for (std::size_t i = 0; i < inner.size(); ++i)
      add_node(Point{inner.nodes()[i], z2}, bi.outer().weights()[o] * inner.weights()[i]);
  }
  return h;
}

namespace {

// Monomials whose squared modulus is not integrable against e^{-phi} near the
// grading center of a disk rule.
std::vector<Monomial> divergent_monomials(const Weight& weight, const std::vector<Monomial>& basis,
                                          const DiskRule& rule) {
  std::vector<Monomial> bad;
  if (rule.shell_count() < 3) return bad;
  for (const Monomial& m : basis) {
    double shell1 = 0.0;
    double shell2 = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const int s = rule.shells()[i];
      if (s != 1 && s != 2) continue;
      const Complex z = rule.nodes()[i];
      const double v = rule.weights()[i] * weight.density(Point{z, Complex{}}) * std::pow(std::norm(z), m.a);
      (s == 1 ? shell1 : shell2) += v;
    }
    if (!std::isfinite(shell1) || (shell2 > 0.0 && shell1 / shell2 >= kDivergentShellRate)) bad.push_back(m);
  }
  return bad;
}

Rule doubled(const Rule& rule) {
  if (const auto* disk = std::get_if<DiskRule>(&rule)) return DiskRule(disk->spec().doubled());
  return std::get<BidiskRule>(rule).doubled();
}

}  // namespace

BergmanModel build_model(const Weight& weight, int degree, const Rule& rule, const ModelOptions& options) {
  if (degree < 1) throw ParameterError("build_model: degree must be >= 1");
  const Domain domain = std::holds_alternative<DiskRule>(rule) ? Domain::disk : Domain::bidisk;
  if (domain != weight.domain())
    throw ParameterError(std::string("build_model: weight is defined on the ") + to_string(weight.domain()) +
                         " but the rule on the " + to_string(domain));

  BergmanModel model;
  model.domain_ = domain;
  model.weight_ = weight;
  model.degree_ = degree;
  model.basis_ = make_basis(domain, degree, options.basis);
  model.rule_ = rule;

  if (const auto* disk = std::get_if<DiskRule>(&rule)) {
    const auto bad = divergent_monomials(weight, model.basis_, *disk);
    if (!bad.empty()) {
      std::ostringstream os;
      os << "build_model: e^{-phi} does not make these monomials square integrable (multiplier ideal"
         << " excludes them):";
      for (const Monomial& m : bad) os << " " << to_string(m, domain);
      os << "; weight " << weight.describe();
      throw DegeneracyError(os.str());
    }
  }

  model.gram_ = options.serial ? assemble_gram_serial(weight, model.basis_, rule)
                               : assemble_gram(weight, model.basis_, rule);
  // Symmetrize away round-off; the defect is O(eps) by construction.
  model.gram_ = 0.5 * (model.gram_ + model.gram_.adjoint()).eval();

  try {
    model.factor_ = HermitianFactor(model.gram_);
  } catch (const DegeneracyError& e) {
    throw DegeneracyError(std::string("build_model: Gram matrix is numerically singular (") + e.what() +
                          "); lower the degree or change the grading");
  }
  if (model.factor_.scaled_condition() > options.max_condition) {
    std::ostringstream os;
    os << "build_model: Gram condition number " << model.factor_.scaled_condition() << " exceeds "
       << options.max_condition << " at degree " << degree << "; lower the degree or change the grading";
    throw DegeneracyError(os.str());
  }
  {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(model.gram_, Eigen::EigenvaluesOnly);
    model.min_eigenvalue_ = eig.eigenvalues()(0);
    model.condition_ = model.min_eigenvalue_ > 0.0
                           ? eig.eigenvalues()(eig.eigenvalues().size() - 1) / model.min_eigenvalue_
                           : std::numeric_limits<double>::infinity();
  }

  if (options.check_convergence) {
    const Matrix fine = assemble_gram(weight, model.basis_, doubled(rule));
    const double scale = model.gram_.cwiseAbs().maxCoeff();
    const double change = (fine - model.gram_).cwiseAbs().maxCoeff() / scale;
    model.convergence_change_ = change;
    if (!(change < 1e-8)) {
      std::ostringstream os;
      os << "quadrature not converged: doubling orders changes max|G| by " << change << " (relative)";
      model.warnings_.push_back(os.str());
    }
  }
  return model;
}

Eigen::Index BergmanModel::index_of(Monomial m) const {
  for (std::size_t i = 0; i < basis_.size(); ++i)
    if (basis_[i] == m) return static_cast<Eigen::Index>(i);
  return -1;
}

Vector BergmanModel::monomials_at(const Point& p) const {
  Vector v(dimension());
  for (Eigen::Index i = 0; i < dimension(); ++i) v(i) = monomial_value(basis_[static_cast<std::size_t>(i)], p);
  return v;
}

Complex BergmanModel::evaluate(const Vector& coeffs, const Point& p) const {
  return monomials_at(p).transpose() * coeffs;
}

double BergmanModel::norm_sq(const Vector& coeffs) const {
  return (coeffs.adjoint() * gram_ * coeffs)(0, 0).real();
}

Complex kernel(const BergmanModel& model, const Point& z, const Point& w) {
  const Vector pz = model.monomials_at(z);
  const Vector pw = model.monomials_at(w);
  return (pz.transpose() * model.solve(pw.conjugate()))(0, 0);
}

double higher_kernel(const BergmanModel& model, int k) {
  if (k < 0 || k > model.degree()) throw ParameterError("higher_kernel: k must lie in [0, degree]");
  if (model.domain() == Domain::bidisk) {
    if (k != 0) throw ParameterError("higher_kernel: only k = 0 is defined on the bidisk");
    const Eigen::Index i0 = model.index_of({0, 0});
    Vector e = Vector::Zero(model.dimension());
    e(i0) = 1.0;
    return model.solve(e)(i0).real();
  }
  // Orthonormalize z^k, ..., z^D against the Gram matrix restricted to E_k and
  // take the squared length of the functional k! * delta_k in that basis.
  const Eigen::Index first = k;
  const Eigen::Index len = model.dimension() - first;
  const HermitianFactor sub(model.gram().block(first, first, len, len));
  double kfact = 1.0;
  for (int j = 2; j <= k; ++j) kfact *= j;
  // Coordinates of the functional in the orthonormal basis: conj(row of C at z^k).
  const auto row = sub.orthonormal().row(0);
  return kfact * kfact * row.squaredNorm();
}

double bergman_metric_at_zero(const BergmanModel& model) {
  if (model.domain() != Domain::disk) throw ParameterError("bergman_metric_at_zero: disk models only");
  return higher_kernel(model, 1) / higher_kernel(model, 0);
}

double bergman_metric_stencil(const BergmanModel& model, double h) {
  auto log_b = [&](Complex z) { return std::log(kernel(model, z, z).real()); };
  const double lap = (log_b({h, 0}) + log_b({-h, 0}) + log_b({0, h}) + log_b({0, -h}) - 4.0 * log_b({0, 0})) / (h * h);
  return 0.25 * lap;
}

Complex log_kernel_gradient_at_zero(const BergmanModel& model) {
  const Eigen::Index i0 = model.index_of({0, 0});
  const Eigen::Index i1 = model.index_of({1, 0});
  if (i1 < 0) throw ParameterError("log_kernel_gradient_at_zero: degree must be >= 1");
  Vector e = Vector::Zero(model.dimension());
  e(i0) = 1.0;
  const Vector col = model.solve(e);  // column 0 of H^{-1}
  return col(i1) / col(i0);
}

nlohmann::json model_summary(const BergmanModel& model, int max_k) {
  nlohmann::json j;
  j["domain"] = to_string(model.domain());
  j["weight"] = model.weight().to_json();
  j["degree"] = model.degree();
  j["dimension"] = model.dimension();
  j["condition_number"] = model.condition_number();
  j["scaled_condition_number"] = model.scaled_condition_number();
  j["min_eigenvalue"] = model.min_eigenvalue();
  nlohmann::json table = nlohmann::json::array();
  const int top = model.domain() == Domain::disk ? std::min(max_k, model.degree()) : 0;
  for (int k = 0; k <= top; ++k) table.push_back({{"k", k}, {"B_k", higher_kernel(model, k)}});
  j["B_k"] = table;
  if (model.domain() == Domain::disk) j["omega_B"] = bergman_metric_at_zero(model);
  if (model.convergence_change()) j["quadrature_change"] = *model.convergence_change();
  j["warnings"] = model.warnings();
  return j;
}

}  // namespace bergext
