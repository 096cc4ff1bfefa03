#include "bergext/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#ifndef BERGEXT_VERSION
#define BERGEXT_VERSION "0.0.0"
#endif

namespace bergext {

namespace {

constexpr double kConvergenceTolerance = 0.01;
constexpr double kDivergenceThreshold = 3.0;
constexpr int kLemmaMaxK = 6;

using json = nlohmann::json;

json num(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "+inf" : "-inf";
}

double as_double(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "+inf" || s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  return std::numeric_limits<double>::quiet_NaN();
}

Complex complex_from_json(const json& v) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2) return {v[0].get<double>(), v[1].get<double>()};
  throw ParameterError("expected a number or [re, im] pair");
}

json complex_to_json(Complex c) {
  if (c.imag() == 0.0) return c.real();
  return json::array({c.real(), c.imag()});
}

json spec_to_json(const DiskRuleSpec& s) {
  json centers = json::array();
  for (Complex c : s.grading_centers) centers.push_back(complex_to_json(c));
  return {{"radial_order", s.radial_order},
          {"angular_order", s.angular_order},
          {"grading_ratio", s.grading_ratio},
          {"annuli", s.annuli},
          {"grading_centers", centers}};
}

DiskRuleSpec spec_from_json(const json& j, DiskRuleSpec s) {
  s.radial_order = j.value("radial_order", s.radial_order);
  s.angular_order = j.value("angular_order", s.angular_order);
  s.grading_ratio = j.value("grading_ratio", s.grading_ratio);
  s.annuli = j.value("annuli", s.annuli);
  if (j.contains("grading_centers")) {
    s.grading_centers.clear();
    for (const json& c : j.at("grading_centers")) s.grading_centers.push_back(complex_from_json(c));
  }
  return s;
}

std::vector<Complex> complex_list(const json& j) {
  std::vector<Complex> out;
  for (const json& v : j) out.push_back(complex_from_json(v));
  return out;
}

json complex_list_json(const std::vector<Complex>& v) {
  json out = json::array();
  for (Complex c : v) out.push_back(complex_to_json(c));
  return out;
}

/// Orders scaled by 3/2; the bidisk refinement check (doubling both factors
/// costs 16x).
DiskRuleSpec refined(const DiskRuleSpec& s) {
  DiskRuleSpec r = s;
  r.radial_order = (3 * s.radial_order + 1) / 2;
  r.angular_order = (3 * s.angular_order + 1) / 2;
  return r;
}

bool close_rel(double a, double b, double tol) {
  if (!std::isfinite(a) || !std::isfinite(b)) return false;
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

double factorial(int k) {
  double f = 1.0;
  for (int j = 2; j <= k; ++j) f *= j;
  return f;
}

json failure_row(json row, const std::string& status, const std::string& message) {
  row["status"] = status;
  row["message"] = message;
  row["converged"] = false;
  return row;
}

/// Runs `body` and turns library errors into flagged rows.
json guarded(json key, const std::function<json(json)>& body) {
  try {
    return body(key);
  } catch (const DegeneracyError& e) {
    return failure_row(std::move(key), "degenerate", e.what());
  } catch (const DivergenceError& e) {
    return failure_row(std::move(key), "divergent", e.what());
  } catch (const EvaluationError& e) {
    return failure_row(std::move(key), "evaluation_error", e.what());
  }
}

void sort_rows(std::vector<json>& rows, const std::string& key) {
  std::stable_sort(rows.begin(), rows.end(),
                   [&](const json& a, const json& b) { return as_double(a.at(key)) < as_double(b.at(key)); });
}

json provenance(const SweepConfig& config) {
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config.hash()));
  return {{"config_hash", hash},
          {"library_version", library_version()},
          {"schema", kConfigSchema},
          {"quadrature",
           {{"disk", spec_to_json(config.quadrature.disk)},
            {"bidisk_inner", spec_to_json(config.quadrature.bidisk_inner)},
            {"bidisk_outer", spec_to_json(config.quadrature.bidisk_outer)},
            {"branch", spec_to_json(config.quadrature.branch)}}},
          {"convergence_check",
           config.check_convergence ? "norm recomputed with doubled orders (disk) or 1.5x orders (bidisk); "
                                      "converged when the relative change is below 1%"
                                    : "disabled"}};
}

SweepResult make_result(const SweepConfig& config, std::vector<std::string> columns) {
  SweepResult r;
  r.experiment = to_string(config.experiment);
  r.columns = std::move(columns);
  r.provenance = provenance(config);
  return r;
}

/// Strictly monotone growth plus a final/initial ratio above the threshold.
json divergence_verdict(const std::vector<json>& rows_in_sweep_order, const std::string& column) {
  std::vector<double> v;
  for (const json& r : rows_in_sweep_order) v.push_back(r.contains(column) ? as_double(r.at(column)) : NAN);
  bool monotone = v.size() >= 2;
  for (std::size_t i = 1; i < v.size(); ++i) monotone = monotone && v[i] > v[i - 1];
  const double ratio = v.size() >= 2 ? v.back() / v.front() : NAN;
  return {{"criterion", "strictly increasing across the sweep and final/initial ratio above threshold"},
          {"column", column},
          {"steps", static_cast<int>(v.size()) - 1},
          {"strictly_increasing", monotone},
          {"final_over_initial", num(ratio)},
          {"threshold", kDivergenceThreshold},
          {"diverging", monotone && std::isfinite(ratio) && ratio > kDivergenceThreshold}};
}

int claim1_degree(const SweepConfig& c, int m) {
  if (c.degree > 0) return c.degree;
  return std::max(c.min_degree, c.degree_factor * m);
}

double jet_norm(const Weight& w, int degree, const DiskRule& rule) {
  const BergmanModel model = build_model(w, degree, rule);
  return extend_jet_direct(model, Jet{{1.0, 0.0}}).norm_sq;
}

Weight claim34_weight(double eps) {
  RegularizedLogWeight reg;
  reg.epsilon = eps;
  reg.direction = Poly::variable(0) - Poly::variable(1);
  reg.kind = Regularization::convolution;
  return Weight::regularized(Domain::bidisk, reg);
}

/// One weight of the lemma suite. The negative control pairs a weight with a
/// rule far too coarse for the degree.
struct LemmaCase {
  Weight weight;
  std::string label;
  DiskRuleSpec rule;
  double max_condition = 1e14;
  bool negative_control = false;
};

DiskRuleSpec under_resolved_spec() {
  DiskRuleSpec s;
  s.radial_order = 3;
  s.angular_order = 12;
  s.annuli = 1;
  s.grading_centers.clear();
  return s;
}

json lemma_row(const LemmaCase& c, int degree, std::size_t index) {
  json key = {{"index", static_cast<int>(index)}, {"weight", c.label}, {"degree", degree},
              {"negative_control", c.negative_control}};
  return guarded(key, [&](json row) {
    ModelOptions opt;
    opt.max_condition = c.max_condition;
    const BergmanModel model = build_model(c.weight, degree, DiskRule(c.rule), opt);
    const double b0 = higher_kernel(model, 0);
    double worst_margin = std::numeric_limits<double>::infinity();
    json table = json::array();
    for (int k = 0; k <= std::min(kLemmaMaxK, degree); ++k) {
      const double bk = higher_kernel(model, k);
      table.push_back(num(bk));
      if (k == 0) continue;
      const double bound = factorial(k) * factorial(k) * b0;
      worst_margin = std::min(worst_margin, (bk - bound) / bound);
    }
    const double omega = bergman_metric_at_zero(model);
    const double stencil = bergman_metric_stencil(model, 1e-3);
    const double residual = std::abs(stencil - omega) / std::abs(omega);
    // The stencil identity holds in any discrete inner product, so quadrature
    // error only shows against a model on the doubled rule.
    const BergmanModel reference = build_model(c.weight, degree, DiskRule(c.rule.doubled()), opt);
    const double omega_ref = bergman_metric_at_zero(reference);
    const double resolution = std::abs(omega - omega_ref) / std::abs(omega_ref);
    const bool a2 = omega - 1.0 >= -1e-9;
    const bool a3 = worst_margin >= -1e-9;
    const bool fd = residual < 1e-3 && resolution < 1e-3;
    row["B_k"] = table;
    row["B0"] = num(b0);
    row["omega_B"] = num(omega);
    row["omega_stencil"] = num(stencil);
    row["fd_residual"] = num(residual);
    row["resolution_residual"] = num(resolution);
    row["lemma_a2_margin"] = num(omega - 1.0);
    row["lemma_a3_margin"] = num(worst_margin);
    row["lemma_a2"] = a2;
    row["lemma_a3"] = a3;
    row["fd_check"] = fd;
    row["pass"] = a2 && a3 && fd;
    row["condition"] = num(model.condition_number());
    row["scaled_condition"] = num(model.scaled_condition_number());
    row["status"] = "ok";
    row["converged"] = !c.negative_control;
    return row;
  });
}

}  // namespace

const char* to_string(Experiment e) {
  switch (e) {
    case Experiment::claim1: return "claim1";
    case Experiment::claim2: return "claim2";
    case Experiment::claim34: return "claim34";
    case Experiment::lemmas: return "lemmas";
    case Experiment::kernel_table: return "kernel-table";
    case Experiment::extend: return "extend";
    case Experiment::norms: return "norms";
  }
  return "?";
}

Experiment parse_experiment(const std::string& name) {
  for (Experiment e : {Experiment::claim1, Experiment::claim2, Experiment::claim34, Experiment::lemmas,
                       Experiment::kernel_table, Experiment::extend, Experiment::norms})
    if (name == to_string(e)) return e;
  throw ParameterError("unknown experiment '" + name + "'");
}

DiskRuleSpec QuadratureConfig::default_bidisk_inner() {
  DiskRuleSpec s;
  s.radial_order = 8;
  s.angular_order = 64;
  s.annuli = 12;
  return s;
}

DiskRuleSpec QuadratureConfig::default_bidisk_outer() {
  DiskRuleSpec s;
  s.radial_order = 12;
  s.angular_order = 48;
  s.annuli = 1;
  s.grading_centers.clear();
  return s;
}

BidiskRule QuadratureConfig::bidisk_rule() const {
  return BidiskRule(bidisk_inner, bidisk_outer, BidiskGrading::diagonal);
}

void SweepConfig::validate() const {
  auto positive = [](const std::vector<double>& v, const char* name) {
    if (v.empty()) throw ParameterError(std::string("config: ") + name + " grid is empty");
    for (double x : v)
      if (!(x > 0.0)) throw ParameterError(std::string("config: ") + name + " values must be positive");
  };
  switch (experiment) {
    case Experiment::claim1:
      if (ms.empty()) throw ParameterError("config: m grid is empty");
      for (int m : ms)
        if (m < 0) throw ParameterError("config: m values must be >= 0");
      break;
    case Experiment::claim2:
      positive(claim2_eps, "claim2 epsilon");
      if (!std::isfinite(floor_a)) throw ParameterError("config: A must be finite");
      break;
    case Experiment::claim34:
      positive(eps, "epsilon");
      break;
    case Experiment::norms:
      norm.validate();
      if (norm.kind == NormKind::final_example || norm.kind == NormKind::derivative_on_y) positive(eps, "epsilon");
      if (norm.kind == NormKind::gamma_branch && gammas.empty()) throw ParameterError("config: gamma grid is empty");
      for (double g : gammas)
        if (g < 0.0 || g > 1.0) throw ParameterError("config: gamma values must lie in [0, 1]");
      break;
    default:
      break;
  }
  if (degree < 0) throw ParameterError("config: degree must be >= 0");
  if (min_degree < 1 || degree_factor < 0) throw ParameterError("config: invalid degree schedule");
  if (format != "csv" && format != "json") throw ParameterError("config: format must be csv or json");
}

json SweepConfig::to_json() const {
  json j;
  j["schema"] = kConfigSchema;
  j["experiment"] = to_string(experiment);
  j["m"] = ms;
  j["min_degree"] = min_degree;
  j["degree_factor"] = degree_factor;
  j["claim2_epsilon"] = claim2_eps;
  j["A"] = floor_a;
  j["claim2_m"] = claim2_m;
  j["epsilon"] = eps;
  j["gamma"] = gammas;
  j["degree"] = degree;
  j["family"] = family;
  j["weights"] = weights;
  j["weight"] = weight;
  j["jet"] = complex_list_json(jet);
  j["f1"] = complex_list_json(f1);
  j["f2"] = complex_list_json(f2);
  j["norm"] = norm.to_json();
  j["u"] = u;
  j["quadrature"] = {{"disk", spec_to_json(quadrature.disk)},
                     {"bidisk_inner", spec_to_json(quadrature.bidisk_inner)},
                     {"bidisk_outer", spec_to_json(quadrature.bidisk_outer)},
                     {"branch", spec_to_json(quadrature.branch)}};
  j["check_convergence"] = check_convergence;
  j["check_degree"] = check_degree;
  j["out"] = out;
  j["format"] = format;
  return j;
}

SweepConfig SweepConfig::from_json(const json& j) {
  if (!j.is_object()) throw ParameterError("config: expected a JSON object");
  const int schema = j.value("schema", kConfigSchema);
  if (schema != kConfigSchema) throw ParameterError("config: unsupported schema " + std::to_string(schema));
  SweepConfig c;
  try {
    if (j.contains("experiment")) c.experiment = parse_experiment(j.at("experiment").get<std::string>());
    if (j.contains("m")) c.ms = j.at("m").get<std::vector<int>>();
    c.min_degree = j.value("min_degree", c.min_degree);
    c.degree_factor = j.value("degree_factor", c.degree_factor);
    if (j.contains("claim2_epsilon")) c.claim2_eps = j.at("claim2_epsilon").get<std::vector<double>>();
    c.floor_a = j.value("A", c.floor_a);
    c.claim2_m = j.value("claim2_m", c.claim2_m);
    if (j.contains("epsilon")) c.eps = j.at("epsilon").get<std::vector<double>>();
    if (j.contains("gamma")) c.gammas = j.at("gamma").get<std::vector<double>>();
    c.degree = j.value("degree", c.degree);
    c.family = j.value("family", c.family);
    if (j.contains("weights")) c.weights = j.at("weights");
    if (j.contains("weight")) c.weight = j.at("weight");
    if (j.contains("jet")) c.jet = complex_list(j.at("jet"));
    if (j.contains("f1")) c.f1 = complex_list(j.at("f1"));
    if (j.contains("f2")) c.f2 = complex_list(j.at("f2"));
    if (j.contains("norm")) c.norm = NormSpec::from_json(j.at("norm"));
    c.u = j.value("u", c.u);
    if (j.contains("quadrature")) {
      const json& q = j.at("quadrature");
      if (q.contains("disk")) c.quadrature.disk = spec_from_json(q.at("disk"), c.quadrature.disk);
      if (q.contains("bidisk_inner"))
        c.quadrature.bidisk_inner = spec_from_json(q.at("bidisk_inner"), c.quadrature.bidisk_inner);
      if (q.contains("bidisk_outer"))
        c.quadrature.bidisk_outer = spec_from_json(q.at("bidisk_outer"), c.quadrature.bidisk_outer);
      if (q.contains("branch")) c.quadrature.branch = spec_from_json(q.at("branch"), c.quadrature.branch);
    }
    c.check_convergence = j.value("check_convergence", c.check_convergence);
    c.check_degree = j.value("check_degree", c.check_degree);
    c.out = j.value("out", c.out);
    c.format = j.value("format", c.format);
  } catch (const json::exception& e) {
    throw ParameterError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

std::uint64_t SweepConfig::hash() const {
  json j = to_json();
  j.erase("out");
  j.erase("format");
  const std::string text = j.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

json SweepResult::to_json() const {
  return {{"experiment", experiment},
          {"columns", columns},
          {"rows", rows},
          {"metadata", metadata},
          {"provenance", provenance}};
}

std::string SweepResult::to_csv() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
  os << '\n';
  for (const json& row : rows) {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (i) os << ',';
      const json& v = row.contains(columns[i]) ? row.at(columns[i]) : json();
      if (v.is_number_float()) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
        os << buf;
      } else if (v.is_number()) {
        os << v.dump();
      } else if (v.is_boolean()) {
        os << (v.get<bool>() ? "true" : "false");
      } else if (v.is_string()) {
        std::string s = v.get<std::string>();
        if (s.find_first_of(",\"\n") != std::string::npos) {
          std::string q = "\"";
          for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
          s = q + "\"";
        }
        os << s;
      } else if (v.is_null()) {
        os << "nan";
      } else {
        os << '"' << v.dump() << '"';
      }
    }
    os << '\n';
  }
  return os.str();
}

int worker_count() {
  const char* env = std::getenv("BERGEXT_WORKERS");
  if (!env) return 1;
  const int n = std::atoi(env);
  return n >= 1 ? n : 1;
}

std::vector<json> run_rows(std::size_t n, const std::function<json(std::size_t)>& fn) {
  std::vector<json> out(n);
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(worker_count()), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::mutex mu;
  std::size_t next = 0;
  std::exception_ptr error;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i;
        {
          std::lock_guard<std::mutex> lock(mu);
          if (next >= n || error) return;
          i = next++;
        }
        try {
          out[i] = fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

SweepResult run_claim1(const SweepConfig& config) {
  config.validate();
  SweepResult res = make_result(config, {"m", "degree", "norm", "ratio", "converged"});
  const DiskRule rule = config.quadrature.disk_rule();
  const DiskRule fine(config.quadrature.disk.doubled());
  std::vector<int> ms = config.ms;

  std::vector<json> rows = run_rows(ms.size(), [&](std::size_t i) {
    const int m = ms[i];
    const int d = claim1_degree(config, m);
    return guarded({{"m", m}, {"degree", d}}, [&](json row) {
      const Weight w = Weight::linear_re(m);
      const BergmanModel model = build_model(w, d, rule);
      const ExtensionReport rep = extend_jet_direct(model, Jet{{1.0, 0.0}});
      // ratio = ||h||^2 e^{phi(0)} / (|a0|^2 + |a1|^2) with phi(0) = 0 and a = (1, 0).
      const double ratio = rep.norm_sq * std::exp(w.value(Point{})) / 1.0;
      row["norm"] = num(rep.norm_sq);
      row["ratio"] = num(ratio);
      row["condition"] = num(model.condition_number());
      row["scaled_condition"] = num(model.scaled_condition_number());
      row["constraint_residual"] = num(rep.constraint_residual);
      row["status"] = "ok";
      if (config.check_convergence) {
        const double refined_norm = jet_norm(w, d, fine);
        row["refined_norm"] = num(refined_norm);
        row["converged"] = close_rel(rep.norm_sq, refined_norm, kConvergenceTolerance);
      } else {
        row["converged"] = true;
      }
      return row;
    });
  });
  sort_rows(rows, "m");

  bool increasing = rows.size() >= 2;
  for (std::size_t i = 1; i < rows.size(); ++i)
    increasing = increasing && as_double(rows[i]["ratio"]) > as_double(rows[i - 1]["ratio"]);
  std::vector<double> lx, ly;
  for (const json& r : rows) {
    const double m = r["m"].get<double>();
    const double v = as_double(r["ratio"]);
    if (m >= 4 && m <= 8 && std::isfinite(v)) {
      lx.push_back(std::log(m));
      ly.push_back(std::log(v));
    }
  }
  double slope = NAN;
  if (lx.size() >= 2) {
    const double n = static_cast<double>(lx.size());
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxy += (lx[i] - mx) * (ly[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    slope = sxy / sxx;
  }
  res.metadata["strictly_increasing"] = increasing;
  res.metadata["final_over_initial"] = rows.empty() ? json(nullptr) : num(as_double(rows.back()["ratio"]) /
                                                                          as_double(rows.front()["ratio"]));
  res.metadata["loglog_slope_m4_to_m8"] = num(slope);
  res.metadata["divergence"] = divergence_verdict(rows, "ratio");
  if (config.check_degree && !rows.empty()) {
    const int m = ms.empty() ? 0 : *std::max_element(ms.begin(), ms.end());
    const int d = 2 * claim1_degree(config, m);
    try {
      const double doubled = jet_norm(Weight::linear_re(m), d, rule);
      const double base = as_double(rows.back()["norm"]);
      res.metadata["degree_check"] = {{"m", m}, {"degree", d}, {"norm", num(doubled)},
                                      {"relative_change", num(std::abs(doubled - base) / base)}};
    } catch (const DegeneracyError& e) {
      res.metadata["degree_check"] = {{"m", m}, {"degree", d}, {"status", "degenerate"}, {"message", e.what()}};
    }
  }
  res.rows = std::move(rows);
  return res;
}

SweepResult run_claim2(const SweepConfig& config) {
  config.validate();
  SweepResult res = make_result(config, {"epsilon", "A", "m", "degree", "norm", "rhs", "ratio", "converged"});
  const DiskRule rule = config.quadrature.disk_rule();
  const DiskRule fine(config.quadrature.disk.doubled());
  const int d = config.degree > 0 ? config.degree : 24;
  const double m = config.claim2_m;
  const double a = config.floor_a;
  const Weight phi = Weight::linear_re(m);

  std::vector<json> rows = run_rows(config.claim2_eps.size(), [&](std::size_t i) {
    const double eps = config.claim2_eps[i];
    return guarded({{"epsilon", eps}, {"A", a}, {"m", m}, {"degree", d}}, [&](json row) {
      const Weight psi = clamp_max(phi, eps, a);
      const BergmanModel model = build_model(psi, d, rule);
      const ExtensionReport rep = extend_jet_direct(model, Jet{{1.0, 0.0}});
      // psi is constant near 0, so dpsi(0) = 0 and psi(0) = -A.
      const WeightValue psi0 = psi.evaluate(Point{});
      const Complex dpsi0 = psi.dz(Point{})[0];
      const double rhs = (1.0 + std::norm(0.0 - 1.0 * dpsi0)) * std::exp(-psi0.value);
      row["norm"] = num(rep.norm_sq);
      row["rhs"] = num(rhs);
      row["ratio"] = num(rep.norm_sq / rhs);
      row["psi0"] = num(psi0.value);
      row["plateau_radius"] = num(clamp_plateau_radius(m, eps, a));
      row["condition"] = num(model.condition_number());
      row["status"] = "ok";
      if (config.check_convergence) {
        const double refined_norm = jet_norm(psi, d, fine);
        row["refined_norm"] = num(refined_norm);
        row["converged"] = close_rel(rep.norm_sq, refined_norm, kConvergenceTolerance);
      } else {
        row["converged"] = true;
      }
      return row;
    });
  });
  sort_rows(rows, "epsilon");
  // Sweep order is decreasing epsilon.
  std::vector<json> by_decreasing(rows.rbegin(), rows.rend());
  res.metadata["plateau_threshold"] = "psi = -A on |z| <= plateau_radius";
  if (rows.size() >= 2)
    res.metadata["ratio_smallest_over_largest_epsilon"] =
        num(as_double(rows.front()["ratio"]) / as_double(rows.back()["ratio"]));
  res.metadata["divergence"] = divergence_verdict(by_decreasing, "ratio");
  res.rows = std::move(rows);
  return res;
}

SweepResult run_claim34(const SweepConfig& config) {
  config.validate();
  SweepResult res = make_result(config, {"epsilon", "degree", "norm", "rhs32", "rhs33", "ratio32", "ratio33",
                                         "h0_norm_sq", "h1_norm_sq", "converged"});
  const BidiskRule rule = config.quadrature.bidisk_rule();
  const BidiskRule fine(refined(config.quadrature.bidisk_inner), refined(config.quadrature.bidisk_outer),
                        BidiskGrading::diagonal);
  const DiskRule branch = config.quadrature.branch_rule();
  const int d = config.degree > 0 ? config.degree : 16;
  const CrossData data({0.0}, {0.0, 1.0});

  std::vector<json> rows = run_rows(config.eps.size(), [&](std::size_t i) {
    const double eps = config.eps[i];
    return guarded({{"epsilon", eps}, {"degree", d}}, [&](json row) {
      const Weight w = claim34_weight(eps);
      const BergmanModel model = build_model(w, d, rule);
      const ExtensionReport rep = extend_cross(model, data);
      NormSpec plain;
      plain.log_factor = false;
      const FunctionalValue l2 = branch_l2_norm(data, w, branch);
      const FunctionalValue dn = derivative_norm_on_y(data, w, plain, branch);
      const double rhs32 = l2.value;
      const double rhs33 = l2.value + dn.value;
      row["norm"] = num(rep.norm_sq);
      row["rhs32"] = num(rhs32);
      row["rhs33"] = num(rhs33);
      row["derivative_term"] = num(dn.value);
      row["ratio32"] = num(rep.norm_sq / rhs32);
      row["ratio33"] = num(rep.norm_sq / rhs33);
      row["h0_norm_sq"] = num(rep.cross->h0_norm_sq);
      row["h1_norm_sq"] = num(rep.cross->h1_norm_sq);
      row["pythagoras_defect"] = num(rep.cross->pythagoras_defect);
      row["constraint_residual"] = num(rep.constraint_residual);
      row["condition"] = num(model.condition_number());
      row["scaled_condition"] = num(model.scaled_condition_number());
      row["status"] = "ok";
      if (config.check_convergence) {
        const BergmanModel fm = build_model(w, d, fine);
        const double refined_norm = extend_cross(fm, data).norm_sq;
        row["refined_norm"] = num(refined_norm);
        row["converged"] = close_rel(rep.norm_sq, refined_norm, kConvergenceTolerance);
      } else {
        row["converged"] = true;
      }
      return row;
    });
  });
  sort_rows(rows, "epsilon");
  const std::vector<json> by_decreasing(rows.rbegin(), rows.rend());
  res.metadata["data"] = "f = (0, z1)";
  res.metadata["weight"] = "convolution regularization of log|z1 - z2|^2";
  res.metadata["divergence"] = divergence_verdict(by_decreasing, "norm");
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const json& r : rows) {
    const double v = as_double(r.value("rhs33", json(NAN)));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  res.metadata["rhs33_max_over_min"] = num(hi / lo);
  res.metadata["ratio33_trend"] = divergence_verdict(by_decreasing, "ratio33");
  if (config.check_degree && !config.eps.empty()) {
    const double eps = *std::min_element(config.eps.begin(), config.eps.end());
    try {
      const BergmanModel m2 = build_model(claim34_weight(eps), 2 * d, rule);
      const double n2 = extend_cross(m2, data).norm_sq;
      const double base = as_double(rows.front()["norm"]);
      res.metadata["degree_check"] = {{"epsilon", eps}, {"degree", 2 * d}, {"norm", num(n2)},
                                      {"relative_change", num(std::abs(n2 - base) / base)}};
    } catch (const DegeneracyError& e) {
      res.metadata["degree_check"] = {{"epsilon", eps}, {"degree", 2 * d}, {"status", "degenerate"},
                                      {"message", e.what()}};
    }
  }
  res.rows = std::move(rows);
  return res;
}

std::vector<Weight> default_lemma_family() {
  std::vector<Weight> f;
  f.emplace_back(Domain::disk);
  for (int m = 1; m <= 4; ++m) f.push_back(Weight::linear_re(m));
  f.push_back(clamp_max(Weight::linear_re(2), 0.2, 5.0));
  f.push_back(clamp_max(Weight::linear_re(4), 0.1, 20.0));
  return f;
}

SweepResult run_lemma_suite(const SweepConfig& config) {
  config.validate();
  SweepResult res = make_result(config, {"index", "weight", "degree", "omega_B", "lemma_a2_margin", "lemma_a3_margin",
                                         "fd_residual", "resolution_residual", "pass", "negative_control", "status"});
  const int d = config.degree > 0 ? config.degree : 24;
  std::vector<LemmaCase> cases;
  if (!config.weights.empty()) {
    for (const json& w : config.weights) {
      const Weight wt = Weight::from_json(w);
      cases.push_back({wt, wt.describe(), config.quadrature.disk});
    }
  } else if (config.family == "default") {
    for (const Weight& w : default_lemma_family()) cases.push_back({w, w.describe(), config.quadrature.disk});
    cases.push_back({Weight::linear_re(1), "under-resolved: " + Weight::linear_re(1).describe(),
                     under_resolved_spec(), 1e14, true});
  } else {
    throw ParameterError("lemmas: unknown family '" + config.family + "'");
  }

  std::vector<json> rows = run_rows(cases.size(), [&](std::size_t i) { return lemma_row(cases[i], d, i); });
  bool all_pass = true;
  bool control_flagged = true;
  for (const json& r : rows) {
    const bool pass = r.value("pass", false);
    if (r.value("negative_control", false)) control_flagged = control_flagged && !pass;
    else all_pass = all_pass && pass;
  }
  res.metadata["all_family_pass"] = all_pass;
  res.metadata["negative_control_flagged"] = control_flagged;
  res.metadata["tolerances"] = {
      {"lemma_margin", -1e-9}, {"fd_residual", 1e-3}, {"resolution_residual", 1e-3}, {"stencil_h", 1e-3}};
  res.rows = std::move(rows);
  return res;
}

SweepResult run_kernel_table(const SweepConfig& config) {
  config.validate();
  SweepResult res = make_result(config, {"k", "B_k", "lower_bound", "ratio"});
  const Weight w = config.weight.is_null() ? Weight(Domain::disk) : Weight::from_json(config.weight);
  if (w.domain() != Domain::disk) throw ParameterError("kernel-table: disk weight required");
  const int d = config.degree > 0 ? config.degree : 24;
  const BergmanModel model = build_model(w, d, config.quadrature.disk_rule());
  const double b0 = higher_kernel(model, 0);
  for (int k = 0; k <= d; ++k) {
    const double bk = higher_kernel(model, k);
    const double bound = factorial(k) * factorial(k) * b0;
    res.rows.push_back({{"k", k}, {"B_k", num(bk)}, {"lower_bound", num(bound)}, {"ratio", num(bk / bound)}});
  }
  res.metadata["model"] = model_summary(model);
  return res;
}

SweepResult run_norms(const SweepConfig& config) {
  config.validate();
  const NormSpec& spec = config.norm;
  SweepResult res;
  switch (spec.kind) {
    case NormKind::final_example: {
      res = make_result(config, {"epsilon", "value", "oracle", "relative_error", "divergent"});
      const DiskRule rule = config.quadrature.branch_rule();
      for (double eps : config.eps) {
        const FunctionalValue v = final_example_norm(eps, rule);
        const double oracle = kPi * std::log1p(1.0 / (eps * eps));
        res.rows.push_back({{"epsilon", eps},
                            {"value", num(v.value)},
                            {"oracle", oracle},
                            {"relative_error", num(std::abs(v.value - oracle) / oracle)},
                            {"divergent", v.divergent},
                            {"shell_rate", num(v.shell_rate)}});
      }
      break;
    }
    case NormKind::gamma_branch: {
      res = make_result(config, {"gamma", "value", "divergent", "shell_rate"});
      const DiskRule rule = config.quadrature.branch_rule();
      const Weight w = config.weight.is_null() ? Weight(Domain::bidisk) : Weight::from_json(config.weight);
      const bool use_f2 = !config.f2.empty() || config.f1.empty();
      const std::vector<Complex> u = use_f2 ? (config.f2.empty() ? std::vector<Complex>{0.0, 1.0} : config.f2)
                                            : config.f1;
      for (double g : config.gammas) {
        NormSpec s = spec;
        s.gamma = g;
        const FunctionalValue v = gamma_branch_norm(u, use_f2 ? 1 : 0, w, s, rule);
        res.rows.push_back({{"gamma", g}, {"value", num(v.value)}, {"divergent", v.divergent},
                            {"shell_rate", num(v.shell_rate)}});
      }
      break;
    }
    case NormKind::derivative_on_y: {
      res = make_result(config, {"epsilon", "value", "divergent", "shell_rate"});
      const DiskRule rule = config.quadrature.branch_rule();
      const CrossData data(config.f1.empty() ? std::vector<Complex>{0.0} : config.f1,
                           config.f2.empty() ? std::vector<Complex>{0.0, 1.0} : config.f2);
      for (double eps : config.eps) {
        const FunctionalValue v = derivative_norm_on_y(data, claim34_weight(eps), spec, rule);
        res.rows.push_back({{"epsilon", eps}, {"value", num(v.value)}, {"divergent", v.divergent},
                            {"shell_rate", num(v.shell_rate)}});
      }
      break;
    }
    case NormKind::log_weighted_bulk: {
      res = make_result(config, {"u", "value"});
      const Weight w = config.weight.is_null() ? Weight(Domain::bidisk) : Weight::from_json(config.weight);
      const BidiskRule rule(config.quadrature.disk, config.quadrature.disk, BidiskGrading::tensor);
      const double v = log_weighted_bulk_norm(Poly::parse(config.u), w, spec, rule);
      res.rows.push_back({{"u", config.u}, {"value", num(v)}});
      break;
    }
  }
  res.metadata["norm"] = spec.to_json();
  if (!res.columns.empty() && res.columns.front() != "u") sort_rows(res.rows, res.columns.front());
  return res;
}

SweepResult run_sweep(const SweepConfig& config) {
  switch (config.experiment) {
    case Experiment::claim1: return run_claim1(config);
    case Experiment::claim2: return run_claim2(config);
    case Experiment::claim34: return run_claim34(config);
    case Experiment::lemmas: return run_lemma_suite(config);
    case Experiment::kernel_table: return run_kernel_table(config);
    case Experiment::norms: return run_norms(config);
    case Experiment::extend: break;
  }
  throw ParameterError("run_sweep: experiment 'extend' is not a sweep");
}

void write_result(const SweepResult& result, const std::string& path, const std::string& format) {
  std::string text;
  if (format == "csv") text = result.to_csv();
  else if (format == "json") text = result.to_json().dump(2) + "\n";
  else throw ParameterError("unknown output format '" + format + "'");
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << text;
  if (!os) throw std::runtime_error("write to '" + path + "' failed");
}

std::string library_version() { return BERGEXT_VERSION; }

}  // namespace bergext
