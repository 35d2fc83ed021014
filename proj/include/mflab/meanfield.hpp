#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include <json.hpp>

#include "mflab/convolution.hpp"
#include "mflab/fit.hpp"
#include "mflab/interaction.hpp"
#include "mflab/onebody.hpp"

namespace mflab {

enum class Functional { Hartree, HartreeEps, NLS };
const char* to_string(Functional f);

/// Hartree / modified Hartree / NLS functionals on the grid of a OneBodyModel.
///
/// Scaled mode carries the base potential w together with N and beta; the NLS
/// coupling is then a = int w. Contact mode only knows a.
class MeanFieldProblem {
 public:
  static MeanFieldProblem scaled(const OneBodyModel& model, const InteractionPotential& w, double n, double beta,
                                 double epsilon = 0.0);
  static MeanFieldProblem contact(const OneBodyModel& model, double a);

  const OneBodyModel& model() const { return *model_; }
  const Grid& grid() const { return model_->grid(); }
  bool has_potential() const { return static_cast<bool>(wn_); }
  double coupling() const { return a_; }
  double epsilon() const { return epsilon_; }
  double n() const { return n_; }
  double beta() const { return beta_; }
  const InteractionPotential& scaled_potential() const;

  double energy(const VectorXc& u, Functional which) const;
  /// H_eff u, the derivative of the energy with respect to conj(u).
  VectorXc effective(const VectorXc& u, Functional which) const;
  /// Pieces of the energy: {quadratic one-body part, interaction part}.
  std::pair<double, double> energy_parts(const VectorXc& u, Functional which) const;

 private:
  MeanFieldProblem() = default;
  Eigen::VectorXd interaction_field_(const Eigen::VectorXd& rho, Functional which) const;

  const OneBodyModel* model_ = nullptr;
  std::optional<InteractionPotential> wn_;
  std::shared_ptr<PairConvolver> conv_, conv_abs_;
  double a_ = 0.0, epsilon_ = 0.0, n_ = 1.0, beta_ = 0.0;
};

enum class MinimizeStatus { Converged, NoDescent, MaxIterations };
const char* to_string(MinimizeStatus s);

struct MinimizeOptions {
  int starts = 2;                // random starts in addition to the deterministic one
  std::uint64_t seed = 1;
  double tolerance = 0.0;        // projected-gradient norm; 0 selects 1e-8 (1D) / 1e-6 (2D)
  int max_iterations = 20000;
  bool keep_trace = false;
};

struct MinimizationResult {
  VectorXc u;
  double energy = 0.0;
  double constraint_residual = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  double dispersion = 0.0;       // max - min energy over starts
  MinimizeStatus status = MinimizeStatus::Converged;
  int best_start = 0;
  std::vector<double> start_energies;
  std::vector<double> trace;     // energies of the best start (keep_trace)
};

MinimizationResult minimize(const MeanFieldProblem& problem, Functional which, const MinimizeOptions& opt = {});

nlohmann::json to_json(const MinimizationResult& r, const MeanFieldProblem& p, Functional which);

struct GapRow {
  double n;
  double e_hartree;
  double e_nls;
  double gap;
  double functional_gap;  // |E_H[u*] - E_NLS[u*]| at the NLS minimizer u*
};

struct GapReport {
  std::vector<GapRow> rows;
  RateFit fit;
  double beta = 0.0;
  bool slope_ok = true;          // slope <= -beta + 0.15
  double functional_constant = 0.0;  // max_N functional_gap N^beta
  bool bound_ok = true;          // gap <= C N^-beta with that constant
};

GapReport hartree_nls_gap(const OneBodyModel& model, const InteractionPotential& w, const std::vector<double>& ns,
                          double beta, const MinimizeOptions& opt = {});

struct ProbeRow {
  double n;
  double energy;  // E_H[v_N]
  double scaled;  // E_H[v_N] / N^{2 beta}
};

struct ProbeResult {
  std::vector<ProbeRow> rows;
  double kinetic = 0.0;      // |grad u|^2 of the unscaled profile
  double interaction = 0.0;  // iint |u|^2 |u|^2 w of the unscaled profile
  double limit = 0.0;        // fitted limit of E/N^{2 beta} (d = 2)
  bool diverges = false;     // energies decrease without bound along the list
  bool bounded_below = true; // every energy >= the N = first value minus slack
};

struct ProbeOptions {
  int points = 96;           // per axis (grid route)
  double radius = 1.0;       // support of the profile c (1 - |x|^2 / radius^2)^2
};

/// Trial states v_N(x) = N^{d beta / 2} u(N^beta x) with a compactly supported
/// profile. d = 1, 2 use a grid scaled by N^-beta (same nodal values for every
/// N); d = 3 uses radial quadrature.
ProbeResult instability_probe(const TrapConfig& trap, const InteractionPotential& w, double beta,
                              const std::vector<double>& ns, const ProbeOptions& opt = {});

struct CoercivityReport {
  std::vector<double> ratios;   // |grad |u||^2 / (E_H[u] + C0)
  double worst = 0.0;
  double c0 = 0.0;
  double bound = 0.0;           // 1 for w >= 0, (1 + eta) / eta otherwise
  bool finite = true;
};

CoercivityReport kinetic_coercivity_check(const MeanFieldProblem& problem, const std::vector<VectorXc>& samples,
                                          double eta);

/// |grad |u||^2 on the grid by forward differences (zero walls).
double modulus_gradient_norm2(const Grid& g, const VectorXc& u);

/// Random normalized combinations of the lowest eigenmodes.
std::vector<VectorXc> random_mode_samples(const OneBodyModel& model, int count, int modes, std::uint64_t seed);

}  // namespace mflab
