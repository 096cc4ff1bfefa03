#include "bergext/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "bergext/harness.hpp"

namespace bergext {

namespace {

using json = nlohmann::json;

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(text);
  while (std::getline(is, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

/// "1..8" or "1,2,5".
std::vector<int> parse_int_list(const std::string& text) {
  const auto dots = text.find("..");
  try {
    if (dots != std::string::npos) {
      const int lo = std::stoi(text.substr(0, dots));
      const int hi = std::stoi(text.substr(dots + 2));
      if (hi < lo) throw ParameterError("empty range '" + text + "'");
      std::vector<int> out;
      for (int m = lo; m <= hi; ++m) out.push_back(m);
      return out;
    }
    std::vector<int> out;
    for (const auto& s : split(text, ',')) out.push_back(std::stoi(s));
    return out;
  } catch (const std::logic_error&) {
    throw ParameterError("cannot parse integer list '" + text + "'");
  }
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  try {
    for (const auto& s : split(text, ',')) out.push_back(std::stod(s));
  } catch (const std::logic_error&) {
    throw ParameterError("cannot parse number list '" + text + "'");
  }
  return out;
}

/// Comma-separated complex constants such as "1,0" or "0.5+2i,-i".
std::vector<Complex> parse_complex_list(const std::string& text) {
  std::vector<Complex> out;
  for (const auto& s : split(text, ',')) {
    const Poly p = Poly::parse(s);
    if (p.degree() > 0) throw ParameterError("expected a constant, got '" + s + "'");
    out.push_back(p(Point{}));
  }
  return out;
}

json read_json_arg(const std::string& text) {
  std::string body = text;
  if (!text.empty() && text[0] == '@') {
    std::ifstream is(text.substr(1));
    if (!is) throw ParameterError("cannot read '" + text.substr(1) + "'");
    std::stringstream ss;
    ss << is.rdbuf();
    body = ss.str();
  }
  try {
    return json::parse(body);
  } catch (const json::exception& e) {
    throw ParameterError(std::string("invalid JSON: ") + e.what());
  }
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream os(path);
  if (!os) throw ParameterError("cannot open '" + path + "' for writing");
  os << text;
}

struct Options {
  std::string config_path;
  std::string out;
  std::string format;
  int degree = -1;
  bool no_convergence = false;
  bool check_degree = false;
  std::string ms;
  std::string eps;
  std::string gammas;
  double floor_a = 0.0;
  double claim2_m = 0.0;
  int min_degree = 0;
  std::string weight;
  std::string jet;
  std::string f1;
  std::string f2;
  std::string family;
  std::string kind;
  std::string variant;
  std::string u;
  std::string at;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config_path, "JSON config file (schema 1)");
  sub->add_option("--out", o.out, "Output file (default: stdout)");
  sub->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--degree", o.degree, "Truncation degree (0 = experiment default)")->check(CLI::NonNegativeNumber);
}

void add_sweep(CLI::App* sub, Options& o) {
  sub->add_flag("--no-convergence-check", o.no_convergence, "Skip the refined-quadrature recomputation");
  sub->add_flag("--check-degree", o.check_degree, "Recompute the largest parameter at doubled degree");
}

SweepConfig load_config(const Options& o, Experiment e, const CLI::App* sub) {
  SweepConfig c;
  bool config_format = false;
  if (!o.config_path.empty()) {
    json j = read_json_arg("@" + o.config_path);
    config_format = j.contains("format");
    j["experiment"] = to_string(e);
    c = SweepConfig::from_json(j);
  }
  c.experiment = e;
  auto given = [&](const char* name) {
    const CLI::Option* opt = sub->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  if (given("--out")) c.out = o.out;
  if (given("--degree")) c.degree = o.degree;
  if (given("--no-convergence-check") && o.no_convergence) c.check_convergence = false;
  if (given("--check-degree") && o.check_degree) c.check_degree = true;
  if (given("--min-degree")) c.min_degree = o.min_degree;
  if (given("--A")) c.floor_a = o.floor_a;
  if (given("--eps")) {
    if (e == Experiment::claim2) c.claim2_eps = parse_double_list(o.eps);
    else c.eps = parse_double_list(o.eps);
  }
  if (given("--m")) {
    if (e == Experiment::claim2) c.claim2_m = std::stod(o.ms);
    else c.ms = parse_int_list(o.ms);
  }
  if (given("--gamma")) c.gammas = parse_double_list(o.gammas);
  if (given("--weight")) c.weight = read_json_arg(o.weight);
  if (given("--jet")) c.jet = parse_complex_list(o.jet);
  if (given("--f1")) c.f1 = parse_complex_list(o.f1);
  if (given("--f2")) c.f2 = parse_complex_list(o.f2);
  if (given("--family")) c.family = o.family;
  if (given("--u")) c.u = o.u;
  if (given("--kind")) {
    json n = c.norm.to_json();
    n["kind"] = o.kind;
    c.norm = NormSpec::from_json(n);
  }
  if (given("--variant")) {
    json n = c.norm.to_json();
    n["variant"] = o.variant;
    c.norm = NormSpec::from_json(n);
  }
  if (given("--format")) {
    c.format = o.format;
  } else if (c.out.size() > 5 && c.out.substr(c.out.size() - 5) == ".json") {
    c.format = "json";
  } else if (!config_format) {
    const bool tabular = e == Experiment::claim1 || e == Experiment::claim2 || e == Experiment::claim34;
    c.format = tabular ? "csv" : "json";
  }
  c.validate();
  return c;
}

Weight weight_or_default(const SweepConfig& c, Domain d) {
  if (c.weight.is_null()) return Weight(d);
  const Weight w = Weight::from_json(c.weight);
  if (w.domain() != d) throw ParameterError(std::string("weight must live on the ") + to_string(d));
  return w;
}

int run_kernel(const SweepConfig& c, const std::string& at) {
  const Weight w = c.weight.is_null() ? Weight(Domain::disk) : Weight::from_json(c.weight);
  json out;
  if (w.domain() == Domain::disk) {
    const int d = c.degree > 0 ? c.degree : 24;
    const BergmanModel model = build_model(w, d, c.quadrature.disk_rule());
    out = model_summary(model);
    if (!at.empty()) {
      json values = json::array();
      for (Complex z : parse_complex_list(at)) {
        const Complex k = kernel(model, z, z);
        values.push_back({{"z", {z.real(), z.imag()}}, {"B0", k.real()}});
      }
      out["kernel_diagonal"] = values;
    }
  } else {
    const int d = c.degree > 0 ? c.degree : 16;
    const BergmanModel model = build_model(w, d, c.quadrature.bidisk_rule());
    out = model_summary(model);
  }
  emit(out.dump(2) + "\n", c.out);
  return 0;
}

int run_extend_jet(const SweepConfig& c) {
  if (c.jet.empty()) throw ParameterError("extend-jet: --jet is required");
  const Weight w = weight_or_default(c, Domain::disk);
  const int d = c.degree > 0 ? c.degree : 24;
  const BergmanModel model = build_model(w, d, c.quadrature.disk_rule());
  const Jet jet{c.jet};
  const ExtensionReport direct = extend_jet_direct(model, jet);
  const ExtensionReport recursive = extend_jet_recursive(model, jet);
  json out = recursive.to_json();
  out["direct_norm_sq"] = direct.norm_sq;
  out["solver_agreement"] = (direct.coefficients - recursive.coefficients).norm() /
                            std::max(1e-300, direct.coefficients.norm());
  if (jet.size() == 2) {
    const JetEstimate e = rhs_estimate_jet(model, jet);
    out["rhs_exact"] = e.exact;
    out["rhs_ot_style"] = std::isfinite(e.ot_style) ? json(e.ot_style) : json("+inf");
    out["omega_B"] = e.omega_b;
  }
  out["weight"] = w.describe();
  emit(out.dump(2) + "\n", c.out);
  return 0;
}

int run_extend_cross(const SweepConfig& c) {
  const Weight w = weight_or_default(c, Domain::bidisk);
  const CrossData data(c.f1.empty() ? std::vector<Complex>{0.0} : c.f1,
                       c.f2.empty() ? std::vector<Complex>{0.0} : c.f2);
  const int d = c.degree > 0 ? c.degree : std::max(8, data.degree());
  const BergmanModel model = build_model(w, d, c.quadrature.bidisk_rule());
  const ExtensionReport rep = extend_cross(model, data);
  json out = rep.to_json();
  try {
    const CrossEstimate e = rhs_estimate_cross(model, data, c.quadrature.branch_rule());
    out["rhs"] = {{"point_term", e.point_term},
                  {"branch_terms", {e.branch_terms[0], e.branch_terms[1]}},
                  {"total", e.total},
                  {"norm_over_rhs", rep.norm_sq / e.total}};
  } catch (const DivergenceError& e) {
    out["rhs"] = {{"total", "+inf"}, {"message", e.what()}};
  }
  out["weight"] = w.describe();
  emit(out.dump(2) + "\n", c.out);
  return 0;
}

int run_sweep_command(const SweepConfig& c) {
  const SweepResult r = run_sweep(c);
  if (c.out.empty()) {
    std::cout << (c.format == "json" ? r.to_json().dump(2) + "\n" : r.to_csv());
  } else {
    write_result(r, c.out, c.format);
  }
  return 0;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Weighted Bergman kernels and minimal-norm extensions"};
  app.require_subcommand(1);
  app.set_version_flag("--version", library_version());
  Options o;

  auto* kernel_cmd = app.add_subcommand("kernel", "Model summary: B_k(0) table, omega_B(0), conditioning");
  add_common(kernel_cmd, o);
  kernel_cmd->add_option("--weight", o.weight, "Weight JSON or @file");
  kernel_cmd->add_option("--at", o.at, "Comma-separated points for B0(z, z)");

  auto* jet_cmd = app.add_subcommand("extend-jet", "Minimal extension of a jet at the origin of the disk");
  add_common(jet_cmd, o);
  jet_cmd->add_option("--weight", o.weight, "Weight JSON or @file");
  jet_cmd->add_option("--jet", o.jet, "Derivatives a_0,...,a_{N-1}")->required();

  auto* cross_cmd = app.add_subcommand("extend-cross", "Minimal extension of data on the cross z1 z2 = 0");
  add_common(cross_cmd, o);
  cross_cmd->add_option("--weight", o.weight, "Bidisk weight JSON or @file");
  cross_cmd->add_option("--f1", o.f1, "Coefficients of f1(z2) on {z1 = 0}");
  cross_cmd->add_option("--f2", o.f2, "Coefficients of f2(z1) on {z2 = 0}");

  auto* c1 = app.add_subcommand("claim1", "Sweep over phi = -2m Re z");
  add_common(c1, o);
  add_sweep(c1, o);
  c1->add_option("--m", o.ms, "m values, e.g. 1..8 or 1,2,4");
  c1->add_option("--min-degree", o.min_degree, "Degree schedule D = max(min-degree, 6m)");

  auto* c2 = app.add_subcommand("claim2", "Sweep over the clamped weight max(phi + eps log|z|^2, -A)");
  add_common(c2, o);
  add_sweep(c2, o);
  c2->add_option("--eps", o.eps, "epsilon values");
  c2->add_option("--A", o.floor_a, "Floor A");
  c2->add_option("--m", o.ms, "m of the base weight -2m Re z");

  auto* c34 = app.add_subcommand("claim34", "Cross extension of (0, z1) under regularized log|z1 - z2|^2");
  add_common(c34, o);
  add_sweep(c34, o);
  c34->add_option("--eps", o.eps, "epsilon values");

  auto* lem = app.add_subcommand("lemmas", "Kernel inequalities across a weight family");
  add_common(lem, o);
  lem->add_option("--family", o.family, "Weight family (default)");

  auto* kt = app.add_subcommand("kernel-table", "B_k(0) for k <= degree");
  add_common(kt, o);
  kt->add_option("--weight", o.weight, "Weight JSON or @file");

  auto* nrm = app.add_subcommand("norms", "Norm functionals on the bidisk model");
  add_common(nrm, o);
  nrm->add_option("--kind", o.kind, "log_weighted_bulk, gamma_branch, derivative_on_y or final_example");
  nrm->add_option("--variant", o.variant, "theorem or conjecture");
  nrm->add_option("--gamma", o.gammas, "gamma values");
  nrm->add_option("--eps", o.eps, "epsilon values");
  nrm->add_option("--weight", o.weight, "Bidisk weight JSON or @file");
  nrm->add_option("--u", o.u, "Numerator polynomial for log_weighted_bulk");
  nrm->add_option("--f1", o.f1, "Coefficients of f1(z2)");
  nrm->add_option("--f2", o.f2, "Coefficients of f2(z1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (kernel_cmd->parsed()) return run_kernel(load_config(o, Experiment::kernel_table, kernel_cmd), o.at);
    if (jet_cmd->parsed()) return run_extend_jet(load_config(o, Experiment::extend, jet_cmd));
    if (cross_cmd->parsed()) return run_extend_cross(load_config(o, Experiment::extend, cross_cmd));
    if (c1->parsed()) return run_sweep_command(load_config(o, Experiment::claim1, c1));
    if (c2->parsed()) return run_sweep_command(load_config(o, Experiment::claim2, c2));
    if (c34->parsed()) return run_sweep_command(load_config(o, Experiment::claim34, c34));
    if (lem->parsed()) return run_sweep_command(load_config(o, Experiment::lemmas, lem));
    if (kt->parsed()) return run_sweep_command(load_config(o, Experiment::kernel_table, kt));
    if (nrm->parsed()) return run_sweep_command(load_config(o, Experiment::norms, nrm));
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const DegeneracyError& e) {
    std::cerr << "degenerate: " << e.what() << "\n";
    return 2;
  } catch (const DivergenceError& e) {
    std::cerr << "divergent: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cerr << app.help();
  return 1;
}

}  // namespace bergext
