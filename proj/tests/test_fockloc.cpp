#include <doctest.h>

#include <cmath>
#include <random>

#include "mflab/fockloc.hpp"
#include "mflab/manybody.hpp"
#include "oracles/first_quantized.hpp"

using namespace mflab;

namespace {

std::vector<bool> low_mask(int m, int n_low) {
  std::vector<bool> low(m, false);
  for (int a = 0; a < n_low; ++a) low[a] = true;
  return low;
}

std::vector<int> first(int n) {
  std::vector<int> v(n);
  for (int a = 0; a < n; ++a) v[a] = a;
  return v;
}

double min_eigenvalue(const MatrixXc& a) {
  return Eigen::SelfAdjointEigenSolver<MatrixXc>(0.5 * (a + a.adjoint()), Eigen::EigenvaluesOnly).eigenvalues()[0];
}

}  // namespace

TEST_CASE("localized blocks agree with the first-quantized construction") {
  const int n = 3, m = 4;
  const FockSector s(n, m);
  const VectorXc psi = haar_state(static_cast<Eigen::Index>(s.dimension()), 8);
  const MatrixXc big = oracle::symmetric_embedding(s) * psi;
  const MatrixXc gamma = big * big.adjoint();
  for (int n_low : {1, 2, 3}) {
    CAPTURE(n_low);
    const auto g = localize(s, psi, n_low);
    double total = 0.0;
    for (int k = 0; k <= n; ++k) {
      CAPTURE(k);
      const MatrixXc full = oracle::localized_block(gamma, n, m, k, low_mask(m, n_low));
      const MatrixXc restricted = oracle::restrict_modes(full, k, m, first(n_low));
      const MatrixXc ek = oracle::symmetric_embedding(FockSector(k, n_low));
      const MatrixXc ref = ek.adjoint() * restricted * ek;
      CHECK((g.minus[k] - ref).norm() < 1e-12);
      total += g.minus_trace(k);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(g.normalization_defect_minus < 1e-12);
    CHECK(g.normalization_defect_plus < 1e-12);
    CHECK(g.min_block_eigenvalue > -1e-12);
  }
}

TEST_CASE("k = 0 block is the weight of the all-high configurations") {
  const FockSector s(4, 3);
  const VectorXc psi = haar_state(static_cast<Eigen::Index>(s.dimension()), 3);
  const auto g = localize(s, psi, 1);
  double high = 0.0;
  for (std::size_t i = 0; i < s.dimension(); ++i)
    if (s.occupation(i)[0] == 0) high += std::norm(psi[static_cast<Eigen::Index>(i)]);
  CHECK(std::real(g.minus[0](0, 0)) == doctest::Approx(high).epsilon(1e-12));
  // one low mode: G_k is the probability of k particles in mode 0
  for (int k = 0; k <= 4; ++k) {
    double p = 0.0;
    for (std::size_t i = 0; i < s.dimension(); ++i)
      if (s.occupation(i)[0] == k) p += std::norm(psi[static_cast<Eigen::Index>(i)]);
    CHECK(g.minus_trace(k) == doctest::Approx(p).epsilon(1e-12));
  }
}

TEST_CASE("all modes low: only the top block survives") {
  const FockSector s(3, 3);
  const VectorXc psi = haar_state(static_cast<Eigen::Index>(s.dimension()), 4);
  const auto g = localize(s, psi, 3);
  CHECK((g.minus[3] - psi * psi.adjoint()).norm() < 1e-12);
  for (int k = 0; k < 3; ++k) CHECK(g.minus_trace(k) == doctest::Approx(0.0));
  CHECK_THROWS_AS(localize(s, psi, 4), Error);
  CHECK_THROWS_AS(localize(s, psi, 1, false), Error);
}

TEST_CASE("localized density matrices reconstruct the projected ones") {
  const FockSector s(5, 4);
  for (std::uint64_t seed : {1u, 2u}) {
    const VectorXc psi = haar_state(static_cast<Eigen::Index>(s.dimension()), seed);
    const auto r = check_localization(s, psi, 2);
    CHECK(r.defect_n1 < 1e-12);
    CHECK(r.defect_n2 < 1e-12);
    CHECK(r.pass);
    const auto g = localize(s, psi, 2);
    const MatrixXc g1 = reduced_density_matrix(s, psi, 1);
    CHECK((localized_rdm(g, 1) - restrict_to_low(g1, 1, 4, 2)).norm() < 1e-12);
  }
}

TEST_CASE("de Finetti moments: uniform measure and positivity") {
  const int dim = 3;
  for (int k : {1, 2}) {
    const FockSector sk(k, dim);
    const double dk = static_cast<double>(sk.dimension());
    const MatrixXc g = MatrixXc::Identity(static_cast<Eigen::Index>(dk), static_cast<Eigen::Index>(dk)) / dk;
    for (int m : {1, 2}) {
      const double dm = static_cast<double>(FockSector(m, dim).dimension());
      const MatrixXc mom = definetti_moment(g, k, m, dim);
      CHECK((mom - MatrixXc::Identity(mom.rows(), mom.cols()) / dm).norm() < 1e-12);
    }
  }
  // a pure product-state weight: trace 1 and positive
  VectorXc v(3);
  v << 0.6, cplx(0.0, 0.8), 0.0;
  const VectorXc v2 = product_state(v, 2);
  const MatrixXc mom = definetti_moment(v2 * v2.adjoint(), 2, 2, 3);
  CHECK(std::real(mom.trace()) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(min_eigenvalue(mom) > -1e-12);
}

TEST_CASE("de Finetti moment agrees with Monte Carlo over Haar samples") {
  const int dim = 2, k = 2, m = 2;
  const VectorXc g0 = haar_state(static_cast<Eigen::Index>(FockSector(k, dim).dimension()), 12);
  const MatrixXc g = g0 * g0.adjoint();
  const MatrixXc exact = definetti_moment(g, k, m, dim);
  const auto mc = haar_moment(g, k, m, dim, 20000, 5);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < exact.rows(); ++i)
    for (Eigen::Index j = 0; j < exact.cols(); ++j) {
      const double zr = std::abs(std::real(mc.mean(i, j) - exact(i, j))) / std::max(mc.stderr_re(i, j), 1e-12);
      const double zi = std::abs(std::imag(mc.mean(i, j) - exact(i, j))) / std::max(mc.stderr_im(i, j), 1e-12);
      worst = std::max({worst, zr, zi});
    }
  CHECK(worst < 5.0);
}

TEST_CASE("quantitative de Finetti bound on random and product states") {
  const FockSector s(10, 2);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto r = ckmr_certify(s, haar_state(static_cast<Eigen::Index>(s.dimension()), seed), 2);
    CHECK(r.bound == doctest::Approx(1.6));
    CHECK(r.distance <= r.bound);
    CHECK(r.pass);
  }
  VectorXc u(2);
  u << 0.8, 0.6;
  const auto p = ckmr_certify(s, product_state(u, 10), 1);
  CHECK(p.distance <= p.bound);
  CHECK(p.distance < 0.5);
}

TEST_CASE("localized de Finetti gap: Jensen, mass deficit, bound") {
  const FockSector s(6, 4);
  for (std::uint64_t seed : {4u, 5u}) {
    const VectorXc psi = haar_state(static_cast<Eigen::Index>(s.dimension()), seed);
    const auto r = localized_definetti_gap(s, psi, 2, 2);
    CHECK(r.asserted);
    CHECK(r.bound == doctest::Approx(8.0 * 2 / 6));
    CHECK(r.distance <= r.bound);
    CHECK(r.jensen_lhs >= r.jensen_rhs - 1e-14);
    CHECK(r.mass_deficit <= r.deficit_bound + 1e-12);
    CHECK(r.mass == doctest::Approx(1.0 - r.mass_deficit));
    const auto g = localize(s, psi, 2);
    CHECK(definetti_mass(g, 2) == doctest::Approx(r.mass).epsilon(1e-12));
    const MatrixXc mom = definetti_moment(g, 2, 2);
    CHECK(min_eigenvalue(mom) > -1e-12);
    CHECK(std::real(mom.trace()) == doctest::Approx(r.mass).epsilon(1e-10));
  }
  CHECK_FALSE(localized_definetti_gap(s, haar_state(static_cast<Eigen::Index>(s.dimension()), 1), 2, 3).asserted);
}

TEST_CASE("condensation diagnostics of a product state") {
  VectorXc u(3);
  u << 0.6, 0.0, cplx(0.0, 0.8);
  const FockSector s(5, 3);
  const VectorXc psi = product_state(u, 5);
  CHECK(psi.norm() == doctest::Approx(1.0));
  const auto d = condensation_diagnostics(reduced_density_matrix(s, psi, 1), reduced_density_matrix(s, psi, 2), u);
  CHECK(d.lambda_max == doctest::Approx(1.0));
  CHECK(d.overlap == doctest::Approx(1.0));
  CHECK(d.distance < 1e-12);
}

TEST_CASE("trace norm") {
  MatrixXc a = MatrixXc::Zero(2, 2);
  a(0, 0) = 1.0;
  a(1, 1) = -2.0;
  CHECK(trace_norm(a) == doctest::Approx(3.0));
}
