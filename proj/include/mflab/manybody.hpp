#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mflab/fock.hpp"
#include "mflab/interaction.hpp"
#include "mflab/lanczos.hpp"
#include "mflab/onebody.hpp"

namespace mflab {

/// W[i,j,k,l] = <phi_i phi_j | w | phi_k phi_l>, particle one in (i,k).
class TwoBodyTensor {
 public:
  explicit TwoBodyTensor(int modes = 0);

  int modes() const { return m_; }
  cplx operator()(int i, int j, int k, int l) const { return data_[idx_(i, j, k, l)]; }
  cplx& operator()(int i, int j, int k, int l) { return data_[idx_(i, j, k, l)]; }

  bool is_real(double tol = 0.0) const;
  /// max |W - symmetrized W| before the last symmetrize() call
  double symmetry_defect() const { return symmetry_defect_; }
  /// Averages over the swap and Hermitian-conjugate symmetries.
  void symmetrize();
  /// max over entries of |W[ijkl] - conj(W[klij])| and |W[ijkl] - W[jilk]|
  double max_asymmetry() const;
  /// Restriction to the first `m` modes.
  TwoBodyTensor truncated(int m) const;

 private:
  std::size_t idx_(int i, int j, int k, int l) const {
    return ((static_cast<std::size_t>(i) * m_ + j) * m_ + k) * m_ + l;
  }
  int m_;
  std::vector<cplx> data_;
  double symmetry_defect_ = 0.0;
};

/// Tensor of an already scaled potential over the first M eigenmodes of the model.
/// Throws Resolution when the potential's width is below two grid cells.
TwoBodyTensor build_two_body_tensor(const OneBodyModel& model, const InteractionPotential& wn, int modes);
/// Same with w_N = N^{d beta} w(N^beta x).
TwoBodyTensor build_two_body_tensor(const OneBodyModel& model, const InteractionPotential& w, double n, double beta,
                                    int modes);

/// Diagonal one-body matrix of the first M eigenvalues.
MatrixXc one_body_matrix(const OneBodyModel& model, int modes);

/// H_N = sum h_ij a+_i a_j + 1/(2(N-1)) sum W_ijkl a+_i a+_j a_l a_k, applied
/// without assembling the matrix: both terms go through the N-1 and N-2
/// particle sectors.
class FockHamiltonian {
 public:
  FockHamiltonian(int particles, const MatrixXc& h, const TwoBodyTensor& w);

  const FockSector& sector() const { return s0_; }
  int particles() const { return s0_.particles(); }
  int modes() const { return s0_.modes(); }
  bool is_real() const { return real_; }

  void apply(const VectorXc& in, VectorXc& out) const;
  void apply(const Eigen::VectorXd& in, Eigen::VectorXd& out) const;  // real h and W only
  double expectation(const VectorXc& psi) const;

  /// Dense matrix (refused above 6000 rows).
  MatrixXc dense() const;

 private:
  template <class S>
  void apply_(const S* in, S* out) const;

  FockSector s0_, s1_, s2_;
  int pairs_ = 0;
  bool real_ = true;
  double prefactor_ = 0.0;
  std::vector<std::int32_t> raise1_, raise2_;
  std::vector<double> amp1_, amp2_;
  MatrixXc h_, wp_;
  Eigen::MatrixXd hr_, wpr_;
};

struct GroundStateResult {
  double energy = 0.0;
  VectorXc vector;
  double residual = 0.0;
  int matvecs = 0;
  int restarts = 0;
  bool converged = false;
};

GroundStateResult ground_state(const FockHamiltonian& h, const LanczosOptions& opt = {});

/// k-body density matrix on the k-particle occupation basis, trace one:
/// gamma_{m,m'} = binom(N,k)^{-1} <C_m' psi, C_m psi> with
/// C_m |n> = prod sqrt(binom(n_i, m_i)) |n - m>.
MatrixXc reduced_density_matrix(const FockSector& sector, const VectorXc& psi, int k);
/// sum over the columns c of <C_m' c, C_m c>, without normalization.
MatrixXc moment_matrix(const FockSector& sector, const MatrixXc& columns, int k);
/// gamma^(k-1) from gamma^(k) over M modes.
MatrixXc partial_trace(const MatrixXc& gamma_k, int k, int modes);

struct EnergyIdentity {
  double expectation = 0.0;  // <psi, H_N psi> / N
  double half_trace = 0.0;   // Tr[H_2 gamma^(2)] / 2
  double defect = 0.0;
  double relative = 0.0;     // defect / (1 + |expectation|)
};

EnergyIdentity energy_identity_check(const FockHamiltonian& hn, const VectorXc& psi, const MatrixXc& h,
                                     const TwoBodyTensor& w);
/// Same with gamma^(2) of the normalized psi already at hand.
EnergyIdentity energy_identity_check(const FockHamiltonian& hn, const VectorXc& psi, const MatrixXc& h,
                                     const TwoBodyTensor& w, const MatrixXc& gamma2);

struct HartreeCoefficients {
  double energy = 0.0;
  VectorXc c;
  double gradient_norm = 0.0;
  int iterations = 0;
};

/// Hartree energy c+ h c + 1/2 sum W c_i* c_j* c_k c_l over unit c in C^M.
double hartree_coefficient_energy(const MatrixXc& h, const TwoBodyTensor& w, const VectorXc& c);
HartreeCoefficients minimize_hartree_coefficients(const MatrixXc& h, const TwoBodyTensor& w, int starts = 4,
                                                  std::uint64_t seed = 1);

struct VariationalGap {
  double e_many = 0.0;     // E(N)/N
  double e_hartree = 0.0;  // e_H^(M)
  double gap = 0.0;
  bool holds = true;       // E(N)/N <= e_H^(M) + 1e-10
};

VariationalGap variational_gap(double e_per_particle, const MatrixXc& h, const TwoBodyTensor& w,
                               std::uint64_t seed = 1);

struct TruncationCheck {
  double cutoff = 0.0;     // adjusted L
  double required = 0.0;   // precondition threshold on L
  bool precondition = true;
  bool flagged = false;    // EXPECTED_POSSIBLE_FAILURE
  int n_low = 0;
  int modes = 0;
  double min_eigenvalue = 0.0;
  bool pass = true;        // min eigenvalue >= -1e-9 (only asserted under the precondition)

  nlohmann::json to_json() const;
};

/// Smallest eigenvalue of H_2 - P-^2 H_2^eps P-^2 - 1/2 (P+ h P+ x 1 + 1 x P+ h P+)
/// on the bosonic two-particle space of all computed modes.
TruncationCheck truncation_inequality_check(const OneBodyModel& model, const InteractionPotential& w, double n,
                                            double beta, double cutoff, double epsilon, double c_const = 4.0);

/// Required L: C N^{d beta} / eps, or C / eps^2 when d = 1 and beta > 0.
double truncation_cutoff_rule(int dim, double n, double beta, double epsilon, double c_const);

}  // namespace mflab
