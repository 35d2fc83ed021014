#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mflab/error.hpp"
#include "mflab/grid.hpp"

namespace mflab {

/// amplitude * exp(-|x|^2 / (2 width^2))
struct GaussianTerm {
  double amplitude = 0.0;
  double width = 1.0;
};

/// Even pair potential w(x) = f(|x|) on R^d with its cached integrals.
///
/// Profiles: a (possibly empty) sum of Gaussians, a smooth compactly supported
/// bump, or tabulated radial values with linear interpolation (zero beyond the
/// last node). Derived potentials (scaled, w - eta|w|, |w|) keep the Gaussian
/// representation whenever it stays exact, so that convolutions can use
/// separable passes.
class InteractionPotential {
 public:
  static InteractionPotential zero(int dim);
  static InteractionPotential gaussians(int dim, std::vector<GaussianTerm> terms);
  static InteractionPotential gaussian(int dim, double amplitude, double width) {
    return gaussians(dim, {{amplitude, width}});
  }
  /// amplitude * exp(1 - 1 / (1 - (r/radius)^2)) inside the ball, 0 outside.
  static InteractionPotential bump(int dim, double amplitude, double radius);
  static InteractionPotential tabulated(int dim, std::vector<double> radii, std::vector<double> values);

  int dimension() const { return dim_; }
  double operator()(double r) const { return radial_(r); }
  const std::function<double(double)>& radial() const { return radial_; }

  /// Exact Gaussian decomposition, when one exists.
  const std::optional<std::vector<GaussianTerm>>& gaussian_terms() const { return terms_; }

  double integral() const { return integral_; }            // a = int w
  double abs_integral() const { return abs_integral_; }    // int |w|
  double negative_integral() const { return neg_integral_; }  // int w^-
  double first_abs_moment() const { return moment_; }       // int |x| |w(x)| dx
  double sup_abs() const { return sup_; }

  /// Smallest length scale of the profile; grids must resolve it.
  double width() const { return width_; }
  /// Radius beyond which |w| is negligible (below 1e-17 sup|w|) or exactly zero.
  double range() const { return range_; }

  bool is_zero() const { return zero_; }
  bool nonnegative() const;

  /// w_N(x) = N^{d beta} w(N^beta x).
  InteractionPotential scaled(double n, double beta) const;
  /// w - eta |w|.
  InteractionPotential modified(double eta) const;
  /// |w|.
  InteractionPotential absolute() const;

  std::string describe() const { return description_; }
  nlohmann::json to_json() const;
  static InteractionPotential from_json(int dim, const nlohmann::json& j);

 private:
  InteractionPotential() = default;
  static InteractionPotential from_terms_(int dim, std::vector<GaussianTerm> terms, std::string description);
  static InteractionPotential from_function_(int dim, std::function<double(double)> f, double width, double range,
                                             std::string description);
  void compute_integrals_();

  int dim_ = 1;
  bool zero_ = false;
  std::function<double(double)> radial_;
  std::optional<std::vector<GaussianTerm>> terms_;
  double integral_ = 0, abs_integral_ = 0, neg_integral_ = 0, moment_ = 0, sup_ = 0;
  double width_ = 1, range_ = 0;
  std::string description_;
  nlohmann::json spec_;
};

/// The N-dependent potential of the many-body Hamiltonian.
struct ScaledPotential {
  InteractionPotential base;
  double n = 1.0;
  double beta = 0.0;

  double scale() const;  // N^beta
  InteractionPotential potential() const { return base.scaled(n, beta); }
};

// ---------------------------------------------------------------------------
// Stability certificates
// ---------------------------------------------------------------------------

enum class Verdict { Stable, StableUpToSearch, Unstable, Borderline };
const char* to_string(Verdict v);

struct ClassicalStabilityOptions {
  int points = 32;       // per axis
  double extent = 4.0;   // grid covers [-extent, extent]^d
  int starts = 8;
  std::uint64_t seed = 1;
  int max_iterations = 2000;
};

struct ClassicalStabilityResult {
  Verdict verdict = Verdict::StableUpToSearch;
  double best_value = 0.0;      // min over found rho of sum rho_i rho_j w(x_i - x_j)
  std::vector<double> witness;  // minimizing rho on the grid nodes
  Grid grid;
  double fourier_minimum = 0.0; // min_k w^(k); >= 0 certifies stability
  bool fourier_certified = false;
  std::vector<double> start_values;
};

/// Multi-start projected-gradient search for a density rho >= 0, sum rho = 1,
/// with negative interaction energy, plus the Fourier sufficient certificate.
ClassicalStabilityResult check_classical_stability(const InteractionPotential& w,
                                                   const ClassicalStabilityOptions& opt);

/// Minimum over k in [0, kmax] of the Fourier transform of w.
double fourier_minimum(const InteractionPotential& w, double kmax, int samples = 400);

struct TownesProfile {
  std::vector<double> r;
  std::vector<double> q;
  std::vector<double> dq;
  double q0 = 0.0;         // Q(0)
  double mass = 0.0;       // a* = 2 pi int Q^2 r dr
  double step = 0.0;
  double trusted_radius = 0.0;
  double residual = 0.0;   // sup |Q'' + Q'/r - Q + Q^3| on the trusted range
  std::vector<double> mass_history;  // a* per step halving
  bool monotone = true;

  /// Linear interpolation, zero beyond the trusted radius.
  double operator()(double radius) const;
};

struct TownesOptions {
  double step = 1e-3;
  double r_max = 20.0;
  double relative_tolerance = 1e-4;
  int max_halvings = 4;
  double bracket_low = 1.5;
  double bracket_high = 4.0;
};

/// Outcome of one shooting trajectory from Q(0) = q0.
enum class ShotOutcome { CrossesZero, TurnsUp, Undecided };
ShotOutcome shoot_townes(double q0, double step, double r_max);

TownesProfile compute_townes(const TownesOptions& opt = {});
/// compute_townes() with default options, computed once.
const TownesProfile& townes_reference();

struct HartreeStabilityOptions {
  int points = 64;        // grid refinement resolution per axis
  double extent = 0.0;    // 0 selects an extent from the best family member
  int starts = 4;
  std::uint64_t seed = 1;
  int refine_iterations = 300;
};

struct HartreeStabilityResult {
  Verdict verdict = Verdict::Stable;
  double ratio = 0.0;            // best (most negative) ratio found
  double gaussian_ratio = 0.0;   // best over the Gaussian family
  double gaussian_length = 0.0;
  double townes_ratio = 0.0;     // best over dilations of the Townes profile
  double townes_length = 0.0;
  double refined_ratio = 0.0;    // after grid refinement
  double analytic_lower_bound = 0.0;  // -int w^- / a*
  bool search_caveat = true;     // a STABLE verdict is only an upper bound on the infimum
};

/// Ratio  iint |u|^2 |u|^2 w / (2 |u|^2 |grad u|^2)  searched over Gaussians,
/// dilated Townes profiles, and refined on a grid (d = 2).
HartreeStabilityResult check_hartree_stability_2d(const InteractionPotential& w,
                                                  const HartreeStabilityOptions& opt,
                                                  const TownesProfile& townes);

/// Ratio of a radial profile u(|x|/length) evaluated by Hankel transforms.
double hartree_ratio_radial(const InteractionPotential& w, const std::function<double(double)>& profile,
                            double profile_range, double length);

struct MarginStep {
  double eta;
  Verdict verdict;
  double value;
};

struct MarginResult {
  double eta = 0.0;             // largest eta found with w - eta |w| stable
  Verdict base_verdict = Verdict::Stable;
  bool unstable = false;        // w itself unstable
  std::vector<MarginStep> trace;
  bool cross_check = true;      // eta - 0.01 stable and eta + 0.01 unstable (when < 1)
};

struct MarginOptions {
  int bisection_steps = 16;
  ClassicalStabilityOptions classical;  // d = 3
  HartreeStabilityOptions hartree{64, 0.0, 1, 1, 0};  // d = 2; radial families only by default
};

MarginResult stability_margin(const InteractionPotential& w, const MarginOptions& opt,
                              const TownesProfile* townes = nullptr);

struct StabilityReport {
  std::optional<ClassicalStabilityResult> classical;
  std::optional<HartreeStabilityResult> hartree;
  std::optional<MarginResult> margin;
  double a_star = 0.0;
  double a_star_error = 0.0;
};

nlohmann::json to_json(const StabilityReport& report);

}  // namespace mflab
