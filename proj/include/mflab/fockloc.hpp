#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mflab/fock.hpp"

namespace mflab {

/// Sum of |eigenvalues| of the Hermitian part.
double trace_norm(const MatrixXc& a);

/// Normalized vector of independent standard complex Gaussians.
VectorXc haar_state(Eigen::Index dim, std::uint64_t seed);

/// Coefficients of u^{(x)k} in the occupation basis of FockSector(k, u.size()):
/// sqrt(k! / prod q_i!) prod u_i^{q_i}.
VectorXc product_state(const VectorXc& u, int k);

/// Blocks of a state of N bosons split into the first `n_low` modes and the rest.
/// blocks[k] has rows indexed by FockSector(k, n_low) and columns by
/// FockSector(N - k, M - n_low).
struct LocalizedState {
  int particles = 0;
  int modes = 0;
  int n_low = 0;
  std::vector<MatrixXc> blocks;
  std::vector<MatrixXc> minus;  // G^-_{N,k}, k = 0..N
  std::vector<MatrixXc> plus;   // G^+_{N,j} on j particles in the high modes; left empty above kMaxPlusDimension rows
  static constexpr std::size_t kMaxPlusDimension = 4000;
  double normalization_defect_minus = 0.0;
  double normalization_defect_plus = 0.0;
  double min_block_eigenvalue = 0.0;

  double minus_trace(int k) const { return std::real(minus[k].trace()); }
};

/// Refuses (InvalidArgument) unless the modes are one-body eigenmodes, so that
/// the split is a mode partition.
LocalizedState localize(const FockSector& sector, const VectorXc& psi, int n_low, bool eigenmode_basis = true);

/// (G^-)^(n) = binom(N,n)^{-1} sum_k binom(k,n) Tr_{n+1->k} G^-_{N,k}, on FockSector(n, n_low).
MatrixXc localized_rdm(const LocalizedState& g, int n);

/// P-^{(x)n} gamma P-^{(x)n} expressed on FockSector(n, n_low).
MatrixXc restrict_to_low(const MatrixXc& gamma_n, int n, int modes, int n_low);

struct ReconstructionCheck {
  double defect_n1 = 0.0;
  double defect_n2 = 0.0;
  double normalization_minus = 0.0;
  double normalization_plus = 0.0;
  bool pass = true;
};

ReconstructionCheck check_localization(const FockSector& sector, const VectorXc& psi, int n_low);
/// Same with gamma^(1), gamma^(2) of psi already at hand.
ReconstructionCheck check_localization(const FockSector& sector, const VectorXc& psi, int n_low,
                                       const MatrixXc& gamma1, const MatrixXc& gamma2);

/// int |u^m><u^m| dmu_{N,k}(u) with dmu_{N,k} = dim_k <u^k, G u^k> du, via
/// (dim_k / dim_{k+m}) Tr_k[(G (x) 1_m) Sym_{k+m}]; G lives on FockSector(k, dim).
MatrixXc definetti_moment(const MatrixXc& g, int k, int m, int dim);

/// Weighted moment of order m of mu_N^n = sum_k binom(k,n)/binom(N,n) mu_{N,k}.
MatrixXc definetti_moment(const LocalizedState& g, int n, int m);

/// Total mass sum_k binom(k,n)/binom(N,n) Tr G^-_{N,k}.
double definetti_mass(const LocalizedState& g, int n);

struct MonteCarloMoment {
  MatrixXc mean;
  Eigen::MatrixXd stderr_re, stderr_im;
  int samples = 0;
};

MonteCarloMoment haar_moment(const MatrixXc& g, int k, int m, int dim, int samples, std::uint64_t seed);

struct CkmrResult {
  int particles = 0;
  int dim = 0;
  int k = 0;
  double distance = 0.0;
  double bound = 0.0;
  bool pass = true;

  nlohmann::json to_json() const;
};

/// State on FockSector(N, dim K): distance between gamma^(k) and the order-k
/// moment of mu_{Psi}; bound 4 k dim / N.
CkmrResult ckmr_certify(const FockSector& sector, const VectorXc& psi, int k);

struct LocalizedGap {
  int n = 2;
  double distance = 0.0;
  double bound = 0.0;        // 4 n N_L / N (8 N_L / N for n = 2)
  bool asserted = true;      // only n = 2 is asserted
  bool pass = true;
  double mass = 0.0;         // mu_N^n(S P- H)
  double mass_deficit = 0.0; // 1 - mass
  double projected_deficit = 0.0;  // Tr[(1 - P-^{(x)n}) gamma^(n)]
  double deficit_bound = 0.0;      // n Tr[P+ gamma^(1)]
  double jensen_lhs = 0.0;   // sum (k/N)^2 Tr G_k
  double jensen_rhs = 0.0;   // (sum (k/N) Tr G_k)^2
};

LocalizedGap localized_definetti_gap(const FockSector& sector, const VectorXc& psi, int n_low, int n);

struct Condensation {
  double lambda_max = 0.0;
  double overlap = 0.0;
  double distance = 0.0;
};

/// gamma1, gamma2 over M modes; c = coefficients of the mean-field minimizer
/// in the same modes (normalized here).
Condensation condensation_diagnostics(const MatrixXc& gamma1, const MatrixXc& gamma2, const VectorXc& c);

}  // namespace mflab
