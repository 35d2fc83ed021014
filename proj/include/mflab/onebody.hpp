#pragma once

#include <array>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <json.hpp>

#include "mflab/error.hpp"
#include "mflab/grid.hpp"
#include "mflab/interaction.hpp"

namespace mflab {

enum class TrapKind { Harmonic, PowerLaw, Box, Tabulated };

/// V(x) = coefficient |x|^s (harmonic: s = 2), a Dirichlet box (V = 0, s = inf),
/// or values tabulated at the grid nodes. In 2D, A(x) = omega (-x2, x1).
struct TrapConfig {
  int dim = 1;
  TrapKind kind = TrapKind::Harmonic;
  double exponent = 2.0;
  double coefficient = 1.0;
  double lower_c = 1.0;   // V >= c |x|^s - C
  double lower_C = 0.0;
  double omega = 0.0;
  std::vector<double> values;

  void validate() const;
  double potential(const std::array<double, 3>& x) const;
  /// s, or +inf for the box
  double s() const { return kind == TrapKind::Box ? std::numeric_limits<double>::infinity() : exponent; }
  /// d/s + d/2
  double weyl_exponent() const;
  double sup_negative_part() const;  // sup V^-

  nlohmann::json to_json() const;
  static TrapConfig from_json(const nlohmann::json& j);
};

struct GridSpec {
  double extent = 10.0;
  int points = 256;
  int modes = 10;          // eigenvectors to compute
  bool analytic = false;   // exact oscillator/box eigenpairs sampled on the grid
  bool richardson = false; // extrapolate eigenvalues from grids n and 2n+1 (1D)
  bool check_leakage = true;
};

/// Finite-difference H1 = -(grad + iA)^2 + V with Dirichlet walls. The
/// magnetic part uses Peierls phases on the links.
class OneBodyModel {
 public:
  OneBodyModel(TrapConfig trap, const GridSpec& spec);

  const TrapConfig& trap() const { return trap_; }
  const Grid& grid() const { return grid_; }
  int dim() const { return grid_.dim; }
  bool analytic() const { return analytic_; }
  bool is_complex() const { return trap_.omega != 0.0; }

  /// Ascending eigenvalues. In 1D grid mode every grid eigenvalue is kept;
  /// otherwise one per computed mode.
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  /// Orthonormal eigenvectors (columns) in the inner product h^d sum conj(u) v.
  const MatrixXc& eigenvectors() const { return eigenvectors_; }
  int modes() const { return static_cast<int>(eigenvectors_.cols()); }
  const Eigen::VectorXd& potential_values() const { return potential_; }

  /// Number of eigenvalues strictly below L.
  int count_below(double cutoff) const;

  VectorXc apply(const VectorXc& u) const;
  Eigen::VectorXd apply_real(const Eigen::VectorXd& u) const;  // omega = 0 only
  Eigen::SparseMatrix<cplx> matrix() const;

  double hermiticity_defect() const;
  /// max over modes of boundary |phi| / max |phi|
  double boundary_leakage() const;
  double eigenvalue_shift_from_richardson() const { return richardson_shift_; }

 private:
  void build_potential_();
  void solve_grid_(const GridSpec& spec);
  void solve_analytic_(const GridSpec& spec);

  TrapConfig trap_;
  Grid grid_;
  bool analytic_ = false;
  Eigen::VectorXd potential_;
  Eigen::VectorXd eigenvalues_;
  MatrixXc eigenvectors_;
  double richardson_shift_ = 0.0;
};

OneBodyModel build_one_body(const TrapConfig& trap, const GridSpec& spec);

/// Lowest eigenvalues of the 1D Dirichlet FD operator on `points` nodes.
Eigen::VectorXd fd_eigenvalues_1d(const TrapConfig& trap, double extent, int points);

struct SpectralSplit {
  double requested = 0.0;
  double cutoff = 0.0;
  bool adjusted = false;
  bool empty = false;       // N_L = 0
  int n_low = 0;            // N_L
  std::vector<int> low, high;  // computed modes below / above the cutoff
  Eigen::MatrixXd p_minus, p_plus;  // projectors in the truncated eigenbasis

  /// h^d Phi Phi^* over the low (or high computed) modes, on the grid.
  MatrixXc grid_projector(const OneBodyModel& model, bool low_part) const;
};

SpectralSplit spectral_split(const OneBodyModel& model, double cutoff);

struct WeylRow {
  double cutoff;
  int count;
  double ratio;
};

struct WeylReport {
  double exponent = 0.0;
  std::vector<WeylRow> rows;
  double max_ratio = 0.0;
  double tail_max_ratio = 0.0;  // max over the upper half of the sweep
  bool bounded = true;
};

WeylReport verify_weyl_bound(const OneBodyModel& model, const std::vector<double>& cutoffs);

struct SobolevReport {
  std::vector<double> ratios;       // int |W||u|^2 / (|W|_1 |u| |u'|), discrete
  double worst_ratio = 0.0;
  std::vector<double> amplitudes;   // multipliers of W in the two-particle check
  std::vector<double> lowest_coarse, lowest_fine;
  double fitted_c_coarse = 0.0, fitted_c_fine = 0.0;
  bool pass = true;
};

/// Discrete 1D Sobolev-type inequality on samples u plus the two-particle
/// operator bound, fitted at two resolutions (coarse_points and 2x).
SobolevReport verify_sobolev_1d(const OneBodyModel& model, const InteractionPotential& w,
                                const std::vector<VectorXc>& samples, int coarse_points = 48);

}  // namespace mflab
