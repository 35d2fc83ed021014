#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mflab/fit.hpp"
#include "mflab/interaction.hpp"
#include "mflab/onebody.hpp"

namespace mflab {

enum class CutoffRule {
  Fixed,  // L = value
  Lemma,  // L = C N^{d beta} / eps, or C eps^{-2} when d = 1 and beta > 0
};

struct ExperimentConfig {
  std::string name = "sweep";
  TrapConfig trap;
  GridSpec grid;
  nlohmann::json interaction = {{"profile", "zero"}};
  std::vector<int> ns;
  std::vector<double> betas{0.0};
  std::vector<double> epsilons{0.5};
  int modes = 8;
  CutoffRule cutoff_rule = CutoffRule::Fixed;
  double cutoff_value = 4.0;
  double cutoff_constant = 4.0;
  std::uint64_t seed = 1;
  bool meanfield = true;
  int meanfield_starts = 2;
  double lanczos_tolerance = 1e-9;
  int lanczos_krylov = 150;

  InteractionPotential potential() const;
  double cutoff(int n, double beta, double epsilon) const;
  /// Resolved configuration with every default spelled out.
  nlohmann::json to_json() const;
  /// Strict: unknown keys and type errors are all reported in one Error(Config).
  static ExperimentConfig from_json(const nlohmann::json& j);
};

/// One (N, beta, eps) point of a sweep.
struct SweepRow {
  int n = 0;
  double beta = 0.0;
  double epsilon = 0.0;
  int modes = 0;
  std::string status = "ok";  // ok | error
  std::string error;

  double e_many = 0.0;               // E(N)/N with M modes
  double e_hartree_modes = 0.0;      // e_H^(M)
  double e_hartree_eps_modes = 0.0;  // e_H^eps in the same span
  double e_hartree = 0.0;            // grid minimum of E_H
  double e_hartree_eps = 0.0;        // grid minimum of E_H^eps
  double e_nls = 0.0;                // grid minimum of E_NLS (a = int w)
  double variational_gap = 0.0;      // e_H^(M) - E(N)/N
  bool variational_ok = true;

  double residual = 0.0;
  int matvecs = 0;
  bool converged = false;
  double tensor_symmetry_defect = 0.0;
  double identity_defect = 0.0;      // relative
  double localization_n1 = 0.0;
  double localization_n2 = 0.0;
  double normalization_minus = 0.0;
  double normalization_plus = 0.0;

  double cutoff = 0.0;
  int n_low = 0;
  double definetti_distance = 0.0;
  double definetti_bound = 0.0;
  double mass_deficit = 0.0;
  double deficit_bound = 0.0;

  double lambda_max = 0.0;
  double depletion = 0.0;  // 1 - lambda_max
  double overlap = 0.0;
  double condensate_distance = 0.0;
  double seconds = 0.0;

  std::string key() const;
  nlohmann::json to_json() const;
  static SweepRow from_json(const nlohmann::json& j);
};

/// Column order of results.csv.
const std::vector<std::string>& sweep_columns();
std::string sweep_csv_line(const SweepRow& r);

struct BoundRow {
  int n;
  double lhs;
  double rhs;
  bool pass;
};

/// One inequality with an unspecified constant: C is calibrated on the
/// smallest N and asserted on every larger N.
struct BoundCheck {
  std::string name;
  std::string statement;
  std::string status = "PASS";  // PASS | FAIL | OUT-OF-REGIME
  std::string reason;           // violated hypothesis for OUT-OF-REGIME
  double beta = 0.0;
  double epsilon = 0.0;
  double constant = 0.0;
  double exponent = 0.0;
  std::vector<BoundRow> rows;

  nlohmann::json to_json() const;
};

struct RateSummary {
  std::string quantity;
  double beta = 0.0;
  double epsilon = 0.0;
  RateFit fit;
  std::optional<double> theory;  // theoretical exponent, when one applies
};

struct SweepResult {
  ExperimentConfig config;
  std::vector<SweepRow> rows;
  std::vector<BoundCheck> bounds;
  std::vector<RateSummary> fits;
  int resumed_rows = 0;
  bool pass = true;

  nlohmann::json to_json() const;
};

struct SweepOptions {
  std::string output_dir;   // empty: nothing persisted
  int jobs = 1;
  bool quiet = true;
};

/// Runs every (N, beta, eps) row; rows already in output_dir/rows.jsonl for
/// the same configuration are reused.
SweepResult run_sweep(const ExperimentConfig& config, const SweepOptions& opt = {});

/// Computes one row (no persistence).
SweepRow compute_row(const ExperimentConfig& config, const OneBodyModel& model, int n, double beta, double epsilon);

std::vector<BoundCheck> check_energy_bounds(const ExperimentConfig& config, const std::vector<SweepRow>& rows);

/// Writes results.csv, report.json and plots/*.svg for a finished sweep.
void write_sweep_outputs(const SweepResult& result, const std::string& dir);

/// Deterministic per-row seed.
std::uint64_t derive_seed(std::uint64_t base, int n, double beta, double epsilon);

}  // namespace mflab
