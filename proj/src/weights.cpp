#include "bergext/weights.hpp"

#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>

namespace bergext {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Complex dz_of_real_poly(const Poly& smooth, const Point& p, int factor) {
  // d/dz = (d/dx - i d/dy) / 2
  const double px = smooth.derivative(2 * factor).real_value(p);
  const double py = smooth.derivative(2 * factor + 1).real_value(p);
  return Complex{0.5 * px, -0.5 * py};
}

class StructuredWeight final : public WeightImpl {
 public:
  StructuredWeight(Domain domain, std::vector<LogTerm> terms, Poly smooth, SmoothForm form, bool subharmonic)
      : domain_(domain), terms_(std::move(terms)), smooth_(std::move(smooth)), form_(form),
        subharmonic_(subharmonic) {
    if (smooth_.kind() != Poly::Kind::real && !smooth_.is_zero())
      throw ParameterError("weight: smooth part must be a real polynomial in x, y");
    for (const auto& [e, c] : smooth_.terms())
      if (c.imag() != 0.0) throw ParameterError("weight: smooth part has a non-real coefficient");
    for (const LogTerm& t : terms_) {
      if (!(t.r >= 0.0)) throw ParameterError("weight: log coefficients must be >= 0");
      if (domain_ == Domain::disk && t.f.uses_second_factor())
        throw ParameterError("weight: disk weight uses z2");
      d_terms_.push_back({t.f.derivative(0), t.f.derivative(1)});
    }
    if (domain_ == Domain::disk && smooth_.uses_second_factor())
      throw ParameterError("weight: disk weight uses x2 or y2");
  }

  Domain domain() const override { return domain_; }

  WeightValue evaluate(const Point& p) const override {
    double v = smooth_.real_value(p) + form_value(p);
    for (const LogTerm& t : terms_) {
      if (t.r == 0.0) continue;
      const double m = std::norm(t.f(p));
      if (m == 0.0) return {kNegInf, true};
      v += t.r * std::log(m);
    }
    return {v, false};
  }

  std::array<Complex, 2> dz(const Point& p) const override {
    std::array<Complex, 2> d{dz_of_real_poly(smooth_, p, 0),
                             domain_ == Domain::bidisk ? dz_of_real_poly(smooth_, p, 1) : Complex{}};
    if (form_ == SmoothForm::fubini_study) {
      const double s = 1.0 + std::norm(p[0]) + (domain_ == Domain::bidisk ? std::norm(p[1]) : 0.0);
      d[0] += std::conj(p[0]) / s;
      if (domain_ == Domain::bidisk) d[1] += std::conj(p[1]) / s;
    }
    for (std::size_t j = 0; j < terms_.size(); ++j) {
      const LogTerm& t = terms_[j];
      if (t.r == 0.0) continue;
      const Complex f = t.f(p);
      if (f == Complex{}) {
        std::ostringstream os;
        os << "weight derivative requested on the zero set of " << t.f.to_string();
        throw SingularPointError(os.str());
      }
      d[0] += t.r * d_terms_[j][0](p) / f;
      if (domain_ == Domain::bidisk) d[1] += t.r * d_terms_[j][1](p) / f;
    }
    return d;
  }

  bool subharmonic() const override { return subharmonic_; }

  std::string describe() const override {
    std::ostringstream os;
    bool any = false;
    for (const LogTerm& t : terms_) {
      os << (any ? " + " : "") << t.r << "*log|" << t.f.to_string() << "|^2";
      any = true;
    }
    if (!smooth_.is_zero()) {
      os << (any ? " + " : "") << smooth_.to_string();
      any = true;
    }
    if (form_ == SmoothForm::fubini_study) {
      os << (any ? " + " : "") << "fubini_study";
      any = true;
    }
    if (!any) os << "0";
    return os.str();
  }

  nlohmann::json to_json() const override {
    nlohmann::json j;
    j["domain"] = to_string(domain_);
    j["log_terms"] = nlohmann::json::array();
    for (const LogTerm& t : terms_) j["log_terms"].push_back({{"r", t.r}, {"f", t.f.to_string()}});
    j["smooth"] = form_ == SmoothForm::fubini_study
                      ? (smooth_.is_zero() ? std::string("fubini_study") : smooth_.to_string() + " + fubini_study")
                      : smooth_.to_string();
    if (!subharmonic_) j["subharmonic"] = false;
    return j;
  }

 private:
  double form_value(const Point& p) const {
    if (form_ == SmoothForm::fubini_study)
      return std::log1p(std::norm(p[0]) + (domain_ == Domain::bidisk ? std::norm(p[1]) : 0.0));
    return 0.0;
  }

  Domain domain_;
  std::vector<LogTerm> terms_;
  std::vector<std::array<Poly, 2>> d_terms_;
  Poly smooth_;
  SmoothForm form_;
  bool subharmonic_;
};

class RegularizedWeight final : public WeightImpl {
 public:
  RegularizedWeight(Domain domain, RegularizedLogWeight reg)
      : domain_(domain), reg_(std::move(reg)), d_dir_{reg_.direction.derivative(0), reg_.direction.derivative(1)} {
    if (!(reg_.epsilon > 0.0)) throw ParameterError("regularized weight: epsilon must be > 0");
    if (domain_ == Domain::disk && reg_.direction.uses_second_factor())
      throw ParameterError("regularized weight: disk weight uses z2");
  }

  Domain domain() const override { return domain_; }

  WeightValue evaluate(const Point& p) const override {
    const double e2 = reg_.epsilon * reg_.epsilon;
    const double m = std::norm(reg_.direction(p));
    if (reg_.kind == Regularization::additive) return {std::log(e2 + m), false};
    if (m < e2) return {(m - e2) / e2 + std::log(e2), false};
    return {std::log(m), false};
  }

  std::array<Complex, 2> dz(const Point& p) const override {
    const double e2 = reg_.epsilon * reg_.epsilon;
    const Complex zeta = reg_.direction(p);
    const double m = std::norm(zeta);
    // d phi / d zeta for each branch, then the chain rule through zeta(z).
    Complex dzeta;
    if (reg_.kind == Regularization::additive) {
      dzeta = std::conj(zeta) / (e2 + m);
    } else if (m < e2) {
      dzeta = std::conj(zeta) / e2;
    } else {
      dzeta = 1.0 / zeta;
    }
    return {dzeta * d_dir_[0](p), domain_ == Domain::bidisk ? dzeta * d_dir_[1](p) : Complex{}};
  }

  bool subharmonic() const override { return true; }

  std::string describe() const override {
    std::ostringstream os;
    os << (reg_.kind == Regularization::convolution ? "conv_eps" : "log(eps^2+|zeta|^2)") << "[eps="
       << reg_.epsilon << ", zeta=" << reg_.direction.to_string() << "]";
    return os.str();
  }

  nlohmann::json to_json() const override {
    return {{"domain", to_string(domain_)},
            {"regularized",
             {{"epsilon", reg_.epsilon},
              {"f", reg_.direction.to_string()},
              {"kind", reg_.kind == Regularization::convolution ? "convolution" : "additive"}}}};
  }

 private:
  Domain domain_;
  RegularizedLogWeight reg_;
  std::array<Poly, 2> d_dir_;
};

class ClampedWeight final : public WeightImpl {
 public:
  ClampedWeight(Weight base, double eps_coeff, double floor)
      : base_(std::move(base)), eps_coeff_(eps_coeff), floor_(floor) {
    if (!(eps_coeff > 0.0)) throw ParameterError("clamp_max: eps_coeff must be > 0");
    if (!std::isfinite(floor)) throw ParameterError("clamp_max: floor must be finite");
  }

  Domain domain() const override { return base_.domain(); }

  WeightValue evaluate(const Point& p) const override { return {inner(p), false}; }

  std::array<Complex, 2> dz(const Point& p) const override {
    if (!(inner_unclamped(p) > -floor_)) return {Complex{}, Complex{}};
    auto d = base_.dz(p);
    const double r2 = radius2(p);
    d[0] += eps_coeff_ * std::conj(p[0]) / r2;
    if (domain() == Domain::bidisk) d[1] += eps_coeff_ * std::conj(p[1]) / r2;
    return d;
  }

  bool subharmonic() const override { return base_.flagged_subharmonic(); }

  std::string describe() const override {
    std::ostringstream os;
    os << "max(" << base_.describe() << " + " << eps_coeff_ << "*log|z|^2, " << -floor_ << ")";
    return os.str();
  }

  nlohmann::json to_json() const override {
    return {{"domain", to_string(domain())},
            {"base", base_.to_json()},
            {"clamp", {{"eps_coeff", eps_coeff_}, {"floor", floor_}}}};
  }

 private:
  double radius2(const Point& p) const {
    return std::norm(p[0]) + (domain() == Domain::bidisk ? std::norm(p[1]) : 0.0);
  }
  double inner_unclamped(const Point& p) const {
    const double r2 = radius2(p);
    if (r2 == 0.0) return kNegInf;
    const WeightValue b = base_.evaluate(p);
    if (b.singular) return kNegInf;
    return b.value + eps_coeff_ * std::log(r2);
  }
  double inner(const Point& p) const { return std::max(inner_unclamped(p), -floor_); }

  Weight base_;
  double eps_coeff_;
  double floor_;
};

}  // namespace

Weight::Weight(Domain domain)
    : impl_(std::make_shared<StructuredWeight>(domain, std::vector<LogTerm>{}, Poly(Poly::Kind::real),
                                               SmoothForm::none, true)) {}

Weight Weight::structured(Domain domain, std::vector<LogTerm> log_terms, Poly smooth, SmoothForm form,
                          bool subharmonic) {
  if (smooth.is_zero()) smooth = Poly(Poly::Kind::real);
  return Weight(std::make_shared<StructuredWeight>(domain, std::move(log_terms), std::move(smooth), form,
                                                   subharmonic));
}

Weight Weight::regularized(Domain domain, RegularizedLogWeight reg) {
  return Weight(std::make_shared<RegularizedWeight>(domain, std::move(reg)));
}

Weight Weight::linear_re(double m) {
  return structured(Domain::disk, {}, Poly::variable(0, Poly::Kind::real) * Complex{-2.0 * m});
}

Domain Weight::domain() const { return impl_->domain(); }
WeightValue Weight::evaluate(const Point& p) const { return impl_->evaluate(p); }

double Weight::density(const Point& p) const {
  const WeightValue v = impl_->evaluate(p);
  if (v.singular) return std::numeric_limits<double>::infinity();
  return std::exp(-v.value);
}

std::array<Complex, 2> Weight::dz(const Point& p) const { return impl_->dz(p); }
bool Weight::flagged_subharmonic() const { return impl_->subharmonic(); }
std::string Weight::describe() const { return impl_->describe(); }
nlohmann::json Weight::to_json() const { return impl_->to_json(); }

Weight Weight::from_json(const nlohmann::json& j) {
  try {
    const std::string dom = j.value("domain", std::string("disk"));
    if (dom != "disk" && dom != "bidisk") throw ParameterError("weight JSON: domain must be disk or bidisk");
    const Domain domain = dom == "disk" ? Domain::disk : Domain::bidisk;

    if (j.contains("clamp")) {
      const auto& c = j.at("clamp");
      nlohmann::json base = j.contains("base") ? j.at("base") : nlohmann::json{{"domain", dom}};
      if (!base.contains("domain")) base["domain"] = dom;
      return clamp_max(from_json(base), c.at("eps_coeff").get<double>(), c.at("floor").get<double>());
    }
    if (j.contains("regularized")) {
      const auto& r = j.at("regularized");
      RegularizedLogWeight reg;
      reg.epsilon = r.at("epsilon").get<double>();
      reg.direction = Poly::parse(r.at("f").get<std::string>());
      const std::string kind = r.value("kind", std::string("convolution"));
      if (kind == "convolution") {
        reg.kind = Regularization::convolution;
      } else if (kind == "additive") {
        reg.kind = Regularization::additive;
      } else {
        throw ParameterError("weight JSON: regularized.kind must be convolution or additive");
      }
      return regularized(domain, std::move(reg));
    }

    std::vector<LogTerm> terms;
    if (j.contains("log_terms"))
      for (const auto& t : j.at("log_terms"))
        terms.push_back({t.at("r").get<double>(), Poly::parse(t.at("f").get<std::string>())});

    SmoothForm form = SmoothForm::none;
    Poly smooth(Poly::Kind::real);
    if (j.contains("smooth")) {
      std::string s = j.at("smooth").get<std::string>();
      const std::string tag = "fubini_study";
      if (const auto pos = s.find(tag); pos != std::string::npos) {
        form = SmoothForm::fubini_study;
        s.erase(pos, tag.size());
        // Drop a dangling '+' left by "p + fubini_study".
        while (!s.empty() && (std::isspace(static_cast<unsigned char>(s.back())) || s.back() == '+')) s.pop_back();
      }
      const bool blank = s.find_first_not_of(" \t+") == std::string::npos;
      if (!blank) smooth = Poly::parse(s, Poly::Kind::real);
    }
    return structured(domain, std::move(terms), std::move(smooth), form, j.value("subharmonic", true));
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("weight JSON: ") + e.what());
  }
}

WeightValue eval_weight(const Weight& w, const Point& p) { return w.evaluate(p); }

Weight clamp_max(const Weight& w, double eps_coeff, double floor) {
  return Weight(std::make_shared<ClampedWeight>(w, eps_coeff, floor));
}

double clamp_plateau_radius(double m, double eps_coeff, double floor) {
  // g(r) = 2 m r + 2 eps log r is increasing in r; bisect g(r) = -floor on (0, 1].
  auto g = [&](double r) { return 2.0 * m * r + 2.0 * eps_coeff * std::log(r); };
  if (g(1.0) <= -floor) return 1.0;
  double lo = std::exp(-floor / (2.0 * eps_coeff) - 2.0 * std::abs(m) / eps_coeff - 1.0);
  double hi = 1.0;
  if (g(lo) > -floor) return 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = std::sqrt(lo * hi);
    (g(mid) <= -floor ? lo : hi) = mid;
  }
  return lo;
}

Complex twisted_derivative(const Weight& w, const Poly& f, const Point& p, int var) {
  if (var < 0 || var > 1) throw ParameterError("twisted_derivative: variable index must be 0 or 1");
  const Complex fv = f(p);
  const Complex df = f.derivative(var)(p);
  if (fv == Complex{}) return df;
  return df - fv * w.dz(p)[static_cast<std::size_t>(var)];
}

constexpr int kLaplacianPoints = 16;

double sampled_min_laplacian(const Weight& w, int grid, double h) {
  double worst = std::numeric_limits<double>::infinity();
  const double radius = 0.95;
  const int factors = w.domain() == Domain::bidisk ? 2 : 1;
  for (int factor = 0; factor < factors; ++factor) {
    for (int a = 0; a < grid; ++a) {
      for (int b = 0; b < grid; ++b) {
        const double x = -radius + 2.0 * radius * (a + 0.5) / grid;
        const double y = -radius + 2.0 * radius * (b + 0.5) / grid;
        const Complex z{x, y};
        if (std::abs(z) + h >= 1.0) continue;
        Point p{};
        p[static_cast<std::size_t>(factor)] = z;
        p[static_cast<std::size_t>(1 - factor)] = factors == 2 ? Complex{0.3, -0.2} : Complex{};
        auto at = [&](Complex dz) {
          Point q = p;
          q[static_cast<std::size_t>(factor)] += dz;
          return w.evaluate(q);
        };
        const WeightValue c = at({0, 0});
        if (c.singular) continue;
        // 4 (mean over the circle of radius h - center) / h^2.
        double mean = 0.0;
        bool singular = false;
        for (int k = 0; k < kLaplacianPoints && !singular; ++k) {
          const WeightValue v = at(std::polar(h, 2.0 * kPi * k / kLaplacianPoints));
          singular = v.singular;
          mean += v.value;
        }
        if (singular) continue;
        mean /= kLaplacianPoints;
        const double lap = 4.0 * (mean - c.value) / (h * h);
        if (std::isfinite(lap)) worst = std::min(worst, lap);
      }
    }
  }
  return worst;
}

double cutoff_profile(double t) {
  if (t <= 1.0) return 1.0;
  if (t >= 2.0) return 0.0;
  const double u = t - 1.0;
  return 1.0 - 3.0 * u * u + 2.0 * u * u * u;
}

double cutoff_profile_derivative(double t) {
  if (t <= 1.0 || t >= 2.0) return 0.0;
  const double u = t - 1.0;
  return -6.0 * u + 6.0 * u * u;
}

CutoffValue cutoff_eval(const CutoffFamily& c, const Point& p, bool with_derivative) {
  if (!(c.epsilon > 0.0)) throw ParameterError("cutoff: epsilon must be > 0");
  const Complex s = c.section_scale * c.section(p);
  const double s2 = std::norm(s);
  CutoffValue out;
  auto section_dz = [&](int var) { return c.section_scale * c.section.derivative(var)(p); };

  if (c.kind == CutoffKind::rho_eps) {
    const double e2 = c.epsilon * c.epsilon;
    const double t = s2 / e2;
    out.value = cutoff_profile(t);
    if (with_derivative) {
      // d|s|^2/dz = s' conj(s)
      const double dr = cutoff_profile_derivative(t) / e2;
      for (int k = 0; k < 2; ++k) out.dz[static_cast<std::size_t>(k)] = dr * section_dz(k) * std::conj(s);
    }
    return out;
  }

  if (!(s2 < 1.0) || s2 == 0.0) {
    out.value = s2 == 0.0 ? 0.0 : 1.0;
    return out;
  }
  const double u = -std::log(s2);  // log(1/|s|^2) > 0
  const double t = std::log(u);
  const double shifted = t - 1.0 / c.epsilon + 1.0;
  out.value = cutoff_profile(shifted);
  if (with_derivative) {
    // dt/dz = (1/u) * d(-log|s|^2)/dz = -(1/u) s'/s
    const double dr = cutoff_profile_derivative(shifted);
    for (int k = 0; k < 2; ++k)
      out.dz[static_cast<std::size_t>(k)] = dr * (-1.0 / u) * section_dz(k) / s;
  }
  return out;
}

double xi_unit_threshold(double modulus) {
  if (!(modulus > 0.0 && modulus < 1.0)) throw ParameterError("xi_unit_threshold: modulus must lie in (0, 1)");
  const double t = std::log(-std::log(modulus * modulus));
  if (t <= 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / t;
}

double cutoff_gradient_energy(const CutoffFamily& c, const DiskRule& rule) {
  const Complex v = integrate(rule, [&](Complex z) {
    const CutoffValue cv = cutoff_eval(c, Point{z, Complex{}}, true);
    return Complex{4.0 * std::norm(cv.dz[0])};
  });
  return v.real();
}

double xi_gradient_energy(double epsilon, int order) {
  if (!(epsilon > 0.0)) throw ParameterError("xi_gradient_energy: epsilon must be > 0");
  // With r = exp(-e^t / 2) the disk integral of |grad xi|^2 becomes
  // 4 pi * integral of rho'(t - 1/eps + 1)^2 e^{-t} dt; the integrand vanishes
  // outside t in [1/eps, 1/eps + 1].
  const GaussLegendre gl = gauss_legendre(order);
  const double a = 1.0 / epsilon;
  double sum = 0.0;
  for (std::size_t g = 0; g < gl.nodes.size(); ++g) {
    const double s = 0.5 * (gl.nodes[g] + 1.0);  // in [0, 1]
    const double d = cutoff_profile_derivative(1.0 + s);
    sum += 0.5 * gl.weights[g] * d * d * std::exp(-s);
  }
  return 4.0 * kPi * std::exp(-a) * sum;
}

}  // namespace bergext
