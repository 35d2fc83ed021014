#include <doctest.h>

#include <cmath>
#include <random>

#include "mflab/manybody.hpp"
#include "oracles/first_quantized.hpp"

using namespace mflab;

namespace {

MatrixXc random_hermitian(int m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  MatrixXc a(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) a(i, j) = cplx(g(rng), g(rng));
  return 0.5 * (a + a.adjoint());
}

TwoBodyTensor random_tensor(int m, std::uint64_t seed, bool real = false) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  TwoBodyTensor w(m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) w(i, j, k, l) = real ? cplx(g(rng), 0.0) : cplx(g(rng), g(rng));
  w.symmetrize();
  return w;
}

VectorXc random_state(std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  VectorXc v(static_cast<Eigen::Index>(dim));
  for (auto& x : v) x = cplx(g(rng), g(rng));
  return v.normalized();
}

OneBodyModel oscillator(int modes, double extent = 10, int points = 400) {
  TrapConfig t;
  GridSpec g;
  g.extent = extent;
  g.points = points;
  g.modes = modes;
  return build_one_body(t, g);
}

}  // namespace

TEST_CASE("Fock sector ordering and dimensions") {
  const FockSector s(3, 3);
  CHECK(s.dimension() == 10);
  CHECK(s.occupation_vector(0) == std::vector<int>{3, 0, 0});
  CHECK(s.occupation_vector(9) == std::vector<int>{0, 0, 3});
  for (std::size_t i = 0; i < s.dimension(); ++i) CHECK(s.index(s.occupation_vector(i)) == i);
  CHECK(binomial(10, 3) == 120.0);
  CHECK(FockSector(6, 5).dimension() == static_cast<std::size_t>(binomial(10, 4)));
}

TEST_CASE("second-quantized Hamiltonian equals the first-quantized one on the symmetric subspace") {
  for (int n : {2, 3, 4}) {
    CAPTURE(n);
    const int m = 3;
    const MatrixXc h = random_hermitian(m, 5 + n);
    const TwoBodyTensor w = random_tensor(m, 17 + n);
    const FockHamiltonian hn(n, h, w);
    const MatrixXc e = oracle::symmetric_embedding(hn.sector());
    const MatrixXc ref = e.adjoint() * oracle::hamiltonian(n, h, w) * e;
    CHECK((hn.dense() - ref).norm() < 1e-10 * (1.0 + ref.norm()));
    // matrix-free apply agrees with the dense matrix
    const VectorXc v = random_state(hn.sector().dimension(), 3);
    VectorXc out;
    hn.apply(v, out);
    CHECK((out - ref * v).norm() < 1e-10 * (1.0 + ref.norm()));
    CHECK(hn.expectation(v) == doctest::Approx(std::real(v.dot(ref * v))).epsilon(1e-12));
  }
}

TEST_CASE("N = 1 gives h, W = 0 gives a diagonal spectrum") {
  const MatrixXc h = random_hermitian(4, 2);
  CHECK((FockHamiltonian(1, h, random_tensor(4, 3)).dense() - h).norm() < 1e-12);

  const auto model = oscillator(4);
  const MatrixXc hd = one_body_matrix(model, 4);
  const FockHamiltonian free(3, hd, TwoBodyTensor(4));
  const MatrixXc d = free.dense();
  for (std::size_t i = 0; i < free.sector().dimension(); ++i) {
    double e = 0.0;
    const auto occ = free.sector().occupation_vector(i);
    for (int a = 0; a < 4; ++a) e += occ[a] * model.eigenvalues()[a];
    CHECK(std::real(d(i, i)) == doctest::Approx(e).epsilon(1e-12));
  }
  CHECK((d - MatrixXc(d.diagonal().asDiagonal())).norm() < 1e-12);
}

TEST_CASE("W0000 for a Gaussian in the oscillator ground state") {
  const auto model = oscillator(3, 10, 600);
  for (double sigma : {0.5, 1.0, 2.0}) {
    const double amp = -0.7;
    const auto w = build_two_body_tensor(model, InteractionPotential::gaussian(1, amp, sigma), 3);
    CHECK(std::real(w(0, 0, 0, 0)) == doctest::Approx(amp * sigma / std::sqrt(sigma * sigma + 1.0)).epsilon(1e-4));
    CHECK(w.max_asymmetry() < 1e-12);
    CHECK(w.is_real(1e-12));
    // odd parity: W0001 vanishes
    CHECK(std::abs(w(0, 0, 0, 1)) < 1e-10);
  }
  CHECK_THROWS_AS(build_two_body_tensor(model, InteractionPotential::gaussian(1, 1.0, 0.01), 3), Error);
}

TEST_CASE("reduced density matrices against the first-quantized partial trace") {
  const int n = 3, m = 3;
  const FockSector s(n, m);
  const VectorXc psi = random_state(s.dimension(), 11);
  const MatrixXc big = oracle::symmetric_embedding(s) * psi;
  const MatrixXc gamma_full = big * big.adjoint();
  for (int k : {1, 2}) {
    CAPTURE(k);
    const MatrixXc g = reduced_density_matrix(s, psi, k);
    const MatrixXc ek = oracle::symmetric_embedding(FockSector(k, m));
    const MatrixXc ref = ek.adjoint() * oracle::partial_trace(gamma_full, n, m, k) * ek;
    CHECK((g - ref).norm() < 1e-12);
    CHECK(std::real(g.trace()) == doctest::Approx(1.0));
    CHECK((g - g.adjoint()).norm() < 1e-14);
    CHECK(Eigen::SelfAdjointEigenSolver<MatrixXc>(g).eigenvalues().minCoeff() > -1e-12);
  }
  const MatrixXc g2 = reduced_density_matrix(s, psi, 2);
  CHECK((partial_trace(g2, 2, m) - reduced_density_matrix(s, psi, 1)).norm() < 1e-12);
}

TEST_CASE("energy identity <H_N>/N = Tr[H_2 gamma2]/2 for random states") {
  const int m = 4;
  const MatrixXc h = random_hermitian(m, 21);
  const TwoBodyTensor w = random_tensor(m, 22);
  for (int n : {2, 4, 6}) {
    const FockHamiltonian hn(n, h, w);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const auto id = energy_identity_check(hn, random_state(hn.sector().dimension(), seed), h, w);
      CHECK(id.relative < 1e-12);
    }
  }
}

TEST_CASE("ground state by Lanczos matches dense diagonalization") {
  const auto model = oscillator(5);
  const auto w = build_two_body_tensor(model, InteractionPotential::gaussian(1, -0.5, 1.0), 6.0, 0.0, 5);
  const MatrixXc h = one_body_matrix(model, 5);
  const FockHamiltonian hn(6, h, w);
  CHECK(hn.is_real());
  const auto gs = ground_state(hn);
  CHECK(gs.converged);
  const double ref = Eigen::SelfAdjointEigenSolver<MatrixXc>(hn.dense(), Eigen::EigenvaluesOnly).eigenvalues()[0];
  CHECK(gs.energy == doctest::Approx(ref).epsilon(1e-10));
  CHECK(gs.vector.norm() == doctest::Approx(1.0));

  const auto gap = variational_gap(gs.energy / 6.0, h, w, 3);
  CHECK(gap.holds);
  CHECK(gap.gap >= -1e-10);
  CHECK(gap.e_hartree <= std::real(h(0, 0)) + 0.5 * std::real(w(0, 0, 0, 0)) + 1e-12);
}

TEST_CASE("Hartree coefficient energy and its minimizer") {
  const MatrixXc h = random_hermitian(4, 31);
  const TwoBodyTensor w = random_tensor(4, 32, true);
  VectorXc e0 = VectorXc::Zero(4);
  e0[2] = 1.0;
  CHECK(hartree_coefficient_energy(h, w, e0) ==
        doctest::Approx(std::real(h(2, 2)) + 0.5 * std::real(w(2, 2, 2, 2))));
  const auto r = minimize_hartree_coefficients(h, w, 6, 4);
  CHECK(r.c.norm() == doctest::Approx(1.0));
  CHECK(r.energy == doctest::Approx(hartree_coefficient_energy(h, w, r.c)));
  for (std::uint64_t s = 0; s < 20; ++s) CHECK(r.energy <= hartree_coefficient_energy(h, w, random_state(4, s)) + 1e-10);
}

TEST_CASE("Lanczos lowest eigenpair on a dense random matrix, with deflation") {
  const int n = 300;
  const MatrixXc a = random_hermitian(n, 77);
  Eigen::MatrixXd ar = a.real();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ar);
  auto op = [&](const Eigen::VectorXd& in, Eigen::VectorXd& out) { out = ar * in; };
  LanczosOptions opt;
  opt.krylov = 60;
  opt.max_restarts = 500;
  std::vector<Eigen::VectorXd> found;
  for (int k = 0; k < 4; ++k) {
    opt.seed = 10 + k;
    const auto r = lanczos_lowest<double>(op, n, opt, found);
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(es.eigenvalues()[k]).epsilon(1e-8));
    found.push_back(r.vector);
  }
}

TEST_CASE("tridiagonal solver returns the smallest Ritz value") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 2 + trial % 90;
    std::vector<double> a(m), b(m - 1);
    for (auto& x : a) x = u(rng);
    for (auto& x : b) x = std::abs(u(rng));
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) t(i, i) = a[i];
    for (int i = 0; i + 1 < m; ++i) t(i, i + 1) = t(i + 1, i) = b[i];
    const double ref = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(t).eigenvalues()[0];
    CHECK(tridiagonal_lowest(a, b).first == doctest::Approx(ref).epsilon(1e-10));
  }
}

TEST_CASE("truncation inequality above and below the cutoff rule") {
  const auto model = oscillator(12, 12, 500);
  const auto w = InteractionPotential::gaussian(1, 1.0, 1.0);
  CHECK(truncation_cutoff_rule(1, 10, 0.0, 0.5, 4.0) == doctest::Approx(8.0));
  CHECK(truncation_cutoff_rule(1, 10, 0.3, 0.5, 4.0) == doctest::Approx(16.0));
  CHECK(truncation_cutoff_rule(2, 16, 0.25, 0.5, 4.0) == doctest::Approx(32.0));
  const auto ok = truncation_inequality_check(model, w, 1.0, 0.0, 8.5, 0.5);
  CHECK(ok.precondition);
  CHECK_FALSE(ok.flagged);
  CHECK(ok.n_low == 4);
  CHECK(ok.pass);
  const auto low = truncation_inequality_check(model, w, 1.0, 0.0, 2.0, 0.5);
  CHECK_FALSE(low.precondition);
  CHECK(low.flagged);
  CHECK(low.to_json()["flag"] == "EXPECTED_POSSIBLE_FAILURE");
  CHECK_THROWS_AS(truncation_cutoff_rule(1, 10, 0.0, 0.0, 4.0), Error);
}
