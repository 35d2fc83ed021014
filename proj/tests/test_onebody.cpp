#include <doctest.h>

#include <cmath>

#include "mflab/interaction.hpp"
#include "mflab/meanfield.hpp"
#include "mflab/onebody.hpp"

using namespace mflab;

namespace {

TrapConfig harmonic(int d = 1, double omega = 0.0) {
  TrapConfig t;
  t.dim = d;
  t.omega = omega;
  return t;
}

GridSpec grid(double extent, int points, int modes, bool analytic = false) {
  GridSpec g;
  g.extent = extent;
  g.points = points;
  g.modes = modes;
  g.analytic = analytic;
  return g;
}

}  // namespace

TEST_CASE("analytic oscillator spectrum is 1, 3, 5, ...") {
  const auto m = build_one_body(harmonic(), grid(10, 200, 6, true));
  for (int k = 0; k < 6; ++k) CHECK(m.eigenvalues()[k] == doctest::Approx(2 * k + 1).epsilon(1e-14));
}

TEST_CASE("Richardson-extrapolated grid ground state matches 1 to 1e-6") {
  GridSpec g = grid(12, 1024, 4);
  const auto plain = build_one_body(harmonic(), g);
  g.richardson = true;
  const auto rich = build_one_body(harmonic(), g);
  CHECK(std::abs(rich.eigenvalues()[0] - 1.0) < 1e-6);
  // the plain second-order value is visibly worse
  CHECK(std::abs(plain.eigenvalues()[0] - 1.0) > std::abs(rich.eigenvalues()[0] - 1.0));
}

TEST_CASE("second-order convergence under refinement") {
  std::vector<double> lam;
  for (int n : {63, 127, 255}) lam.push_back(build_one_body(harmonic(), grid(8, n, 3)).eigenvalues()[1]);
  const double ratio = (lam[0] - lam[1]) / (lam[1] - lam[2]);
  CHECK(ratio == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("2D separable oscillator: lambda0 = 2, second level twofold") {
  const auto m = build_one_body(harmonic(2), grid(7, 64, 4));
  const auto& ev = m.eigenvalues();
  CHECK(ev[0] == doctest::Approx(2.0).epsilon(2e-2));
  CHECK(ev[1] == doctest::Approx(4.0).epsilon(2e-2));
  CHECK(std::abs(ev[1] - ev[2]) < 1e-8);
  CHECK(ev[3] > ev[2] + 1.0);
}

TEST_CASE("eigenvectors orthonormal, matrix Hermitian, eigenvalues sorted") {
  for (double omega : {0.0, 0.5}) {
    const auto m = build_one_body(harmonic(2, omega), grid(8.5, 48, 5));
    const MatrixXc gram = m.grid().cell_volume() * m.eigenvectors().adjoint() * m.eigenvectors();
    CHECK((gram - MatrixXc::Identity(5, 5)).norm() < 1e-10);
    CHECK(m.hermiticity_defect() < 1e-12);
    for (int k = 1; k < m.modes(); ++k) CHECK(m.eigenvalues()[k] >= m.eigenvalues()[k - 1]);
  }
}

TEST_CASE("diamagnetic inequality: lambda0(Omega) >= lambda0(0)") {
  const double l0 = build_one_body(harmonic(2), grid(7, 48, 1)).eigenvalues()[0];
  for (double omega : {0.3, 0.8}) {
    const double lw = build_one_body(harmonic(2, omega), grid(7, 48, 1)).eigenvalues()[0];
    CHECK(lw >= l0 - 1e-9);
  }
}

TEST_CASE("gauge symmetry: Omega and the conjugate problem share the spectrum") {
  const auto m = build_one_body(harmonic(2, 0.6), grid(8, 40, 3));
  const auto h = m.matrix();
  Eigen::SparseMatrix<cplx> hc = h.conjugate();
  const MatrixXc phi = m.eigenvectors().conjugate();
  for (int k = 0; k < 3; ++k) {
    const VectorXc r = hc * phi.col(k) - m.eigenvalues()[k] * phi.col(k);
    CHECK(r.norm() / phi.col(k).norm() < 1e-7);
  }
}

TEST_CASE("leakage and argument errors") {
  CHECK_THROWS_AS(build_one_body(harmonic(), grid(2, 64, 4)), Error);
  try {
    build_one_body(harmonic(), grid(2, 64, 4));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Leakage);
  }
  CHECK_THROWS_AS(build_one_body(harmonic(), grid(-1, 64, 4)), Error);
  TrapConfig bad = harmonic();
  bad.kind = TrapKind::PowerLaw;
  bad.exponent = -1.0;
  CHECK_THROWS_AS(build_one_body(bad, grid(8, 64, 2)), Error);
  TrapConfig field1d = harmonic();
  field1d.omega = 1.0;
  CHECK_THROWS_AS(field1d.validate(), Error);
}

TEST_CASE("spectral split counts, projectors and tie-breaking") {
  const auto m = build_one_body(harmonic(), grid(10, 200, 8, true));
  const auto s = spectral_split(m, 10.0);
  CHECK(s.n_low == 5);
  CHECK_FALSE(s.adjusted);
  const Eigen::MatrixXd pm = s.p_minus, pp = s.p_plus;
  CHECK((pm * pm - pm).norm() < 1e-10);
  CHECK((pm * pp).norm() < 1e-10);
  CHECK((pm + pp - Eigen::MatrixXd::Identity(8, 8)).norm() == 0.0);
  CHECK(std::lround(pm.trace()) == 5);

  const auto tie = spectral_split(m, 5.0);
  CHECK(tie.adjusted);
  CHECK(tie.cutoff == doctest::Approx(6.0));
  CHECK(tie.n_low == 3);

  const auto empty = spectral_split(m, 0.0);
  CHECK(empty.empty);
  CHECK(empty.n_low == 0);

  // N_L non-decreasing in L
  int prev = 0;
  for (double l = 0.5; l < 14.0; l += 0.37) {
    const int c = spectral_split(m, l).n_low;
    CHECK(c >= prev);
    prev = c;
  }
}

TEST_CASE("grid projector is the orthogonal projector onto the low modes") {
  const auto m = build_one_body(harmonic(), grid(8, 96, 6));
  const auto s = spectral_split(m, 4.0);
  const MatrixXc p = s.grid_projector(m, true);
  const MatrixXc q = s.grid_projector(m, false);
  CHECK((p * p - p).norm() < 1e-10 * p.norm());
  CHECK((p * q).norm() < 1e-10);
}

TEST_CASE("Weyl ratios: 1D harmonic tends to 1/2, 2D harmonic and box stay bounded") {
  const auto m1 = build_one_body(harmonic(), grid(20, 500, 60, true));
  const auto r1 = verify_weyl_bound(m1, {10.0, 30.0, 60.0, 100.0});
  CHECK(r1.exponent == doctest::Approx(1.0));
  CHECK(r1.bounded);
  CHECK(r1.rows.back().ratio == doctest::Approx(0.5).epsilon(0.02));

  const auto m2 = build_one_body(harmonic(2), grid(8, 56, 12));
  const auto r2 = verify_weyl_bound(m2, {3.0, 5.0, 7.0, 9.0});
  CHECK(r2.exponent == doctest::Approx(2.0));
  CHECK(r2.bounded);
  CHECK(r2.rows[0].count == 1);
  CHECK(r2.rows[1].count == 3);
  CHECK(r2.rows[2].count == 6);

  TrapConfig box;
  box.kind = TrapKind::Box;
  const auto mb = build_one_body(box, grid(3, 200, 10, true));
  const auto rb = verify_weyl_bound(mb, {5.0, 20.0, 50.0});
  CHECK(rb.exponent == doctest::Approx(0.5));
  CHECK(rb.bounded);
}

TEST_CASE("1D Sobolev-type inequality: W = 0 gives ratio 0, -Gaussian gives ratio <= 1") {
  const auto m = build_one_body(harmonic(), grid(8, 128, 6));
  const auto samples = random_mode_samples(m, 6, 5, 3);
  std::vector<VectorXc> all = samples;
  all.push_back(m.eigenvectors().col(0));
  const auto zero = verify_sobolev_1d(m, InteractionPotential::zero(1), all);
  CHECK(zero.worst_ratio == 0.0);
  const auto neg = verify_sobolev_1d(m, InteractionPotential::gaussian(1, -1.0, 0.5), all);
  CHECK(neg.worst_ratio <= 1.0 + 1e-6);
  CHECK(neg.pass);
  CHECK(neg.fitted_c_fine == doctest::Approx(neg.fitted_c_coarse).epsilon(0.25));
}
