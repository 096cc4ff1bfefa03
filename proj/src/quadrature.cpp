#include "bergext/quadrature.hpp"

#include <cmath>
#include <sstream>

#include "bergext/reduce.hpp"

namespace bergext {

GaussLegendre gauss_legendre(int order) {
  if (order < 1) throw ParameterError("gauss_legendre: order must be >= 1");
  const auto n = static_cast<std::size_t>(order);
  GaussLegendre gl{std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      // Legendre recurrence for P_n(x) and its derivative.
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = p2;
      }
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node for the weight.
    double p0 = 1.0;
    double p1 = x;
    for (std::size_t k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
      p0 = p1;
      p1 = p2;
    }
    dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    gl.nodes[i] = -x;
    gl.nodes[n - 1 - i] = x;
    gl.weights[i] = w;
    gl.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) gl.nodes[n / 2] = 0.0;
  return gl;
}

DiskRuleSpec DiskRuleSpec::doubled() const {
  DiskRuleSpec d = *this;
  d.radial_order *= 2;
  d.angular_order *= 2;
  return d;
}

namespace {

void validate(const DiskRuleSpec& spec) {
  if (spec.radial_order < 2) throw ParameterError("disk_rule: radial_order must be >= 2");
  if (spec.angular_order < 4) throw ParameterError("disk_rule: angular_order must be >= 4");
  if (!(spec.grading_ratio > 0.0 && spec.grading_ratio < 1.0))
    throw ParameterError("disk_rule: grading_ratio must lie in (0, 1)");
  if (spec.annuli < 1) throw ParameterError("disk_rule: annuli must be >= 1");
  if (spec.grading_centers.size() > 1)
    throw ParameterError("disk_rule: at most one grading center per disk factor is supported");
  for (const Complex& c : spec.grading_centers)
    if (!(std::abs(c) <= 1.0)) throw ParameterError("disk_rule: grading center outside the closed disk");
}

// Distance from c along direction u to the unit circle.
double ray_length(Complex c, Complex u) {
  const double b = (std::conj(c) * u).real();
  const double disc = b * b + 1.0 - std::norm(c);
  return std::max(0.0, -b + std::sqrt(std::max(0.0, disc)));
}

}  // namespace

DiskRule::DiskRule(const DiskRuleSpec& spec) : spec_(spec) {
  validate(spec);
  const bool grade = !spec.grading_centers.empty();
  center_ = grade ? spec.grading_centers.front() : Complex{0.0, 0.0};
  shell_count_ = grade ? spec.annuli : 1;

  // Normalized radial breakpoints 0 = s_0 < s_1 < ... < s_L = 1.
  std::vector<double> breaks(static_cast<std::size_t>(shell_count_) + 1);
  breaks.front() = 0.0;
  breaks.back() = 1.0;
  for (int j = 1; j < shell_count_; ++j)
    breaks[static_cast<std::size_t>(j)] = std::pow(spec.grading_ratio, shell_count_ - j);

  const GaussLegendre gl = gauss_legendre(spec.radial_order);
  const int na = spec.angular_order;
  const double dtheta = 2.0 * kPi / na;
  const std::size_t expected = static_cast<std::size_t>(na) * gl.nodes.size() *
                               static_cast<std::size_t>(shell_count_);
  nodes_.reserve(expected);
  weights_.reserve(expected);
  shells_.reserve(expected);

  for (int k = 0; k < na; ++k) {
    const Complex u = std::polar(1.0, dtheta * k);
    const double len = ray_length(center_, u);
    if (len <= 0.0) continue;
    for (int j = 0; j < shell_count_; ++j) {
      const double lo = breaks[static_cast<std::size_t>(j)];
      const double hi = breaks[static_cast<std::size_t>(j) + 1];
      const double half = 0.5 * (hi - lo);
      for (std::size_t g = 0; g < gl.nodes.size(); ++g) {
        const double s = lo + half * (gl.nodes[g] + 1.0);
        const double w = dtheta * gl.weights[g] * half * s * len * len;
        if (!(w > 0.0)) continue;
        nodes_.push_back(center_ + (s * len) * u);
        weights_.push_back(w);
        shells_.push_back(j);
      }
    }
  }
}

DiskRule disk_rule(int radial_order, int angular_order, std::vector<Complex> grading_centers,
                   double grading_ratio, int annuli) {
  DiskRuleSpec spec;
  spec.radial_order = radial_order;
  spec.angular_order = angular_order;
  spec.grading_centers = std::move(grading_centers);
  spec.grading_ratio = grading_ratio;
  spec.annuli = annuli;
  return DiskRule(spec);
}

BidiskRule::BidiskRule(const DiskRuleSpec& z1_spec, const DiskRuleSpec& z2_spec,
                       BidiskGrading grading)
    : z1_spec_(z1_spec), z2_spec_(z2_spec), grading_(grading), outer_(z2_spec) {
  if (grading == BidiskGrading::tensor) {
    inner_ = DiskRule(z1_spec);
  } else {
    validate(z1_spec);
  }
}

DiskRule BidiskRule::inner_rule(std::size_t outer_index) const {
  if (grading_ == BidiskGrading::tensor) return inner_;
  DiskRuleSpec spec = z1_spec_;
  spec.grading_centers = {outer_.nodes()[outer_index]};
  return DiskRule(spec);
}

std::size_t BidiskRule::size() const {
  if (grading_ == BidiskGrading::tensor) return outer_.size() * inner_.size();
  std::size_t total = 0;
  for (std::size_t o = 0; o < outer_.size(); ++o) total += inner_rule(o).size();
  return total;
}

BidiskRule BidiskRule::doubled() const {
  return BidiskRule(z1_spec_.doubled(), z2_spec_.doubled(), grading_);
}

BidiskRule bidisk_rule(const DiskRuleSpec& z1_spec, const DiskRuleSpec& z2_spec,
                       BidiskGrading grading) {
  return BidiskRule(z1_spec, z2_spec, grading);
}

namespace {

struct Acc {
  Complex sum{0.0, 0.0};
  std::ptrdiff_t bad = -1;  // first index with a non-finite value
  Complex bad_node{0.0, 0.0};

  Acc& operator+=(const Acc& other) {
    sum += other.sum;
    if (bad < 0 && other.bad >= 0) {
      bad = other.bad;
      bad_node = other.bad_node;
    }
    return *this;
  }
};

bool finite(Complex v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }

[[noreturn]] void throw_bad(std::string_view where, std::ptrdiff_t index, const std::string& node) {
  std::ostringstream os;
  os << where << ": integrand is not finite at node " << index << " " << node;
  throw EvaluationError(os.str());
}

std::string describe(Complex z) {
  std::ostringstream os;
  os.precision(17);
  os << "z=(" << z.real() << "," << z.imag() << ")";
  return os.str();
}

std::string describe(const Point& p) {
  std::ostringstream os;
  os.precision(17);
  os << "z1=(" << p[0].real() << "," << p[0].imag() << ") z2=(" << p[1].real() << ","
     << p[1].imag() << ")";
  return os.str();
}

template <bool Parallel>
Complex integrate_disk(const DiskRule& rule, const DiskIntegrand& f) {
  const auto nodes = rule.nodes();
  const auto weights = rule.weights();
  auto accumulate = [&](std::size_t i, Acc& acc) {
    const Complex v = f(nodes[i]);
    if (!finite(v)) {
      if (acc.bad < 0) {
        acc.bad = static_cast<std::ptrdiff_t>(i);
        acc.bad_node = nodes[i];
      }
      return;
    }
    acc.sum += weights[i] * v;
  };
  Acc total;
  if constexpr (Parallel) {
    total = kernels::tree_reduce(rule.size(), Acc{}, accumulate);
  } else {
    total = kernels::serial_reduce(rule.size(), Acc{}, accumulate);
  }
  if (total.bad >= 0) throw_bad("integrate", total.bad, describe(total.bad_node));
  return total.sum;
}

struct BiAcc {
  Complex sum{0.0, 0.0};
  std::ptrdiff_t bad = -1;
  Point bad_node{};

  BiAcc& operator+=(const BiAcc& other) {
    sum += other.sum;
    if (bad < 0 && other.bad >= 0) {
      bad = other.bad;
      bad_node = other.bad_node;
    }
    return *this;
  }
};

template <bool Parallel>
Complex integrate_bidisk(const BidiskRule& rule, const BidiskIntegrand& f) {
  const DiskRule& outer = rule.outer();
  auto accumulate = [&](std::size_t o, BiAcc& acc) {
    const DiskRule inner = rule.inner_rule(o);
    const Complex z2 = outer.nodes()[o];
    Complex partial{0.0, 0.0};
    for (std::size_t i = 0; i < inner.size(); ++i) {
      const Point p{inner.nodes()[i], z2};
      const Complex v = f(p);
      if (!finite(v)) {
        if (acc.bad < 0) {
          acc.bad = static_cast<std::ptrdiff_t>(o * inner.size() + i);
          acc.bad_node = p;
        }
        continue;
      }
      partial += inner.weights()[i] * v;
    }
    acc.sum += outer.weights()[o] * partial;
  };
  BiAcc total;
  if constexpr (Parallel) {
    total = kernels::tree_reduce(outer.size(), BiAcc{}, accumulate);
  } else {
    total = kernels::serial_reduce(outer.size(), BiAcc{}, accumulate);
  }
  if (total.bad >= 0) throw_bad("integrate", total.bad, describe(total.bad_node));
  return total.sum;
}

}  // namespace

Complex integrate(const DiskRule& rule, const DiskIntegrand& f) { return integrate_disk<true>(rule, f); }
Complex integrate(const BidiskRule& rule, const BidiskIntegrand& f) {
  return integrate_bidisk<true>(rule, f);
}
Complex integrate_serial(const DiskRule& rule, const DiskIntegrand& f) {
  return integrate_disk<false>(rule, f);
}
Complex integrate_serial(const BidiskRule& rule, const BidiskIntegrand& f) {
  return integrate_bidisk<false>(rule, f);
}

ProbedIntegral integrate_probed(const DiskRule& rule, const std::function<double(Complex)>& f) {
  std::vector<double> per_shell(static_cast<std::size_t>(rule.shell_count()), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double v = f(rule.nodes()[i]);
    if (!std::isfinite(v)) throw_bad("integrate_probed", static_cast<std::ptrdiff_t>(i), describe(rule.nodes()[i]));
    const double c = rule.weights()[i] * v;
    per_shell[static_cast<std::size_t>(rule.shells()[i])] += c;
    total += c;
  }
  ProbedIntegral out;
  out.value = total;
  if (rule.shell_count() >= 3 && per_shell[1] > 0.0) {
    // Shell 0 is the full inner disk; compare the two innermost true annuli.
    out.shell_rate = per_shell[1] / per_shell[2];
    out.divergent = out.shell_rate >= kDivergentShellRate;
  }
  return out;
}

}  // namespace bergext
