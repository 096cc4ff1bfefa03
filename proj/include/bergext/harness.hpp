#pragma once

// Parameter sweeps for the counterexample experiments and the lemma suite.
//
// A sweep produces one row per parameter value. Rows are computed by a small
// worker pool (BERGEXT_WORKERS, default 1) and sorted by their key before
// output, so the worker count never changes the result.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bergext/bergman.hpp"
#include "bergext/extension.hpp"
#include "bergext/functionals.hpp"

namespace bergext {

inline constexpr int kConfigSchema = 1;

enum class Experiment { claim1, claim2, claim34, lemmas, kernel_table, extend, norms };

const char* to_string(Experiment e);
Experiment parse_experiment(const std::string& name);

struct QuadratureConfig {
  DiskRuleSpec disk{};
  DiskRuleSpec bidisk_inner = default_bidisk_inner();
  DiskRuleSpec bidisk_outer = default_bidisk_outer();
  DiskRuleSpec branch{};

  static DiskRuleSpec default_bidisk_inner();
  static DiskRuleSpec default_bidisk_outer();
  [[nodiscard]] DiskRule disk_rule() const { return DiskRule(disk); }
  [[nodiscard]] DiskRule branch_rule() const { return DiskRule(branch); }
  /// z1 rule re-centered on the diagonal for every z2 node.
  [[nodiscard]] BidiskRule bidisk_rule() const;
};

struct SweepConfig {
  Experiment experiment = Experiment::claim1;

  // claim1
  std::vector<int> ms{1, 2, 3, 4, 5, 6, 7, 8};
  int min_degree = 24;    ///< D = max(min_degree, degree_factor * m)
  int degree_factor = 6;

  // claim2
  std::vector<double> claim2_eps{0.4, 0.2, 0.1, 0.05};
  double floor_a = 20.0;
  double claim2_m = 4.0;

  // claim34, norms
  std::vector<double> eps{0.2, 0.1, 0.05, 0.025};
  std::vector<double> gammas{0.0, 0.25, 0.5, 1.0};

  /// Fixed degree; 0 selects the per-experiment default (disk 24, bidisk 16
  /// per factor, claim1 schedule above).
  int degree = 0;

  // lemmas, kernel_table, extend
  std::string family = "default";
  nlohmann::json weights = nlohmann::json::array();  ///< explicit weight list
  nlohmann::json weight;                            ///< single weight (kernel_table, extend)
  std::vector<Complex> jet;                          ///< extend on the disk
  std::vector<Complex> f1;                           ///< extend on the bidisk
  std::vector<Complex> f2;
  NormSpec norm{};
  std::string u = "z1*z2";  ///< bulk functional integrand numerator

  QuadratureConfig quadrature{};
  /// Recompute every row with refined quadrature and flag agreement < 1%.
  bool check_convergence = true;
  /// Recompute the largest swept parameter at doubled degree.
  bool check_degree = false;

  std::string out;
  std::string format = "csv";

  /// Throws ParameterError on an empty grid or out-of-range parameter.
  void validate() const;
  [[nodiscard]] nlohmann::json to_json() const;
  /// Reads a schema-1 config; keys absent from `j` keep their defaults.
  static SweepConfig from_json(const nlohmann::json& j);
  /// FNV-1a 64 of the canonical JSON without the output path and format.
  [[nodiscard]] std::uint64_t hash() const;
};

struct SweepResult {
  std::string experiment;
  std::vector<std::string> columns;  ///< CSV columns, in order
  std::vector<nlohmann::json> rows;  ///< each row has at least `columns` keys
  nlohmann::json metadata = nlohmann::json::object();
  nlohmann::json provenance = nlohmann::json::object();

  [[nodiscard]] nlohmann::json to_json() const;
  [[nodiscard]] std::string to_csv() const;
};

/// Worker count from BERGEXT_WORKERS (>= 1).
int worker_count();

/// Runs fn(i) for i < n on worker_count() threads and returns the results in
/// index order.
std::vector<nlohmann::json> run_rows(std::size_t n, const std::function<nlohmann::json(std::size_t)>& fn);

/// R(m) = ||h||^2 e^{phi(0)} / (|a0|^2 + |a1|^2) for phi = -2m Re z and jet (1, 0).
SweepResult run_claim1(const SweepConfig& config);

/// psi = max(-2m Re z + eps log|z|^2, -A), jet (1, 0); ratio = ||h||^2 over
/// the connection estimate (|a0|^2 + |a1 - a0 dpsi(0)|^2) e^{-psi(0)}.
SweepResult run_claim2(const SweepConfig& config);

/// Minimal cross extension N(eps) of f = (0, z1) under the regularized
/// log|z1 - z2|^2, with the branch L2 term and the twisted-derivative term.
SweepResult run_claim34(const SweepConfig& config);

/// B_k(0) tables and the inequalities B_k(0) >= (k!)^2 B_0(0),
/// omega_B(0) >= 1, and the finite-difference check of omega_B(0), per weight.
/// The default family includes an under-resolved negative control.
SweepResult run_lemma_suite(const SweepConfig& config);

/// B_k(0) for k <= degree for one weight.
SweepResult run_kernel_table(const SweepConfig& config);

/// Norm functional evaluations selected by config.norm.kind.
SweepResult run_norms(const SweepConfig& config);

/// Dispatch on config.experiment (extend is handled by the CLI).
SweepResult run_sweep(const SweepConfig& config);

/// Default lemma family: phi = 0, -2m Re z (m = 1..4), two clamp_max variants.
std::vector<Weight> default_lemma_family();

/// Writes CSV or JSON according to `format`; throws ParameterError on an
/// unknown format and std::runtime_error on I/O failure.
void write_result(const SweepResult& result, const std::string& path, const std::string& format);

std::string library_version();

}  // namespace bergext
