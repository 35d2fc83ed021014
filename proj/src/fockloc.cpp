#include "mflab/fockloc.hpp"

#include <cmath>
#include <random>

#include "mflab/manybody.hpp"

namespace mflab {

double trace_norm(const MatrixXc& a) {
  const MatrixXc h = 0.5 * (a + a.adjoint());
  const Eigen::SelfAdjointEigenSolver<MatrixXc> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

VectorXc haar_state(Eigen::Index dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  VectorXc v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = cplx(g(rng), g(rng));
  return v.normalized();
}

namespace {

double log_factorial(int n) { return std::lgamma(n + 1.0); }

// Dimension of the high part of a mode split; an empty high set holds only the vacuum.
std::size_t high_dimension(int particles, int modes) {
  if (modes == 0) return particles == 0 ? 1 : 0;
  return static_cast<std::size_t>(binomial(particles + modes - 1, modes - 1));
}

}  // namespace

VectorXc product_state(const VectorXc& u, int k) {
  const int m = static_cast<int>(u.size());
  const FockSector s(k, m);
  VectorXc v(static_cast<Eigen::Index>(s.dimension()));
  for (std::size_t q = 0; q < s.dimension(); ++q) {
    const std::uint8_t* o = s.occupation(q);
    double lf = log_factorial(k);
    cplx p = 1.0;
    for (int i = 0; i < m; ++i) {
      lf -= log_factorial(o[i]);
      for (int e = 0; e < o[i]; ++e) p *= u[i];
    }
    v[static_cast<Eigen::Index>(q)] = std::sqrt(std::exp(lf)) * p;
  }
  return v;
}

LocalizedState localize(const FockSector& sector, const VectorXc& psi, int n_low, bool eigenmode_basis) {
  if (!eigenmode_basis)
    throw Error(ErrorCode::InvalidArgument, "localization needs a basis of one-body eigenmodes");
  const int n = sector.particles(), m = sector.modes();
  if (n_low < 0 || n_low > m) throw Error(ErrorCode::InvalidArgument, "n_low outside [0, M]");
  if (psi.size() != static_cast<Eigen::Index>(sector.dimension()))
    throw Error(ErrorCode::InvalidArgument, "state does not match the sector");
  const int mh = m - n_low;
  LocalizedState g;
  g.particles = n;
  g.modes = m;
  g.n_low = n_low;
  g.blocks.resize(n + 1);
  g.minus.resize(n + 1);
  g.plus.resize(n + 1);
  std::vector<std::uint8_t> occ(m);
  double tm = 0.0, tp = 0.0;
  g.min_block_eigenvalue = 0.0;
  for (int k = 0; k <= n; ++k) {
    const std::size_t dl = n_low ? FockSector(k, n_low).dimension() : (k == 0 ? 1 : 0);
    const std::size_t dh = high_dimension(n - k, mh);
    MatrixXc c = MatrixXc::Zero(static_cast<Eigen::Index>(dl), static_cast<Eigen::Index>(dh));
    if (dl && dh) {
      const FockSector sl(k, std::max(n_low, 1));
      const FockSector sh(n - k, std::max(mh, 1));
      for (std::size_t a = 0; a < dl; ++a) {
        if (n_low) std::copy(sl.occupation(a), sl.occupation(a) + n_low, occ.begin());
        if (mh == 0) {
          c(static_cast<Eigen::Index>(a), 0) = psi[static_cast<Eigen::Index>(sector.index(occ.data()))];
          continue;
        }
        for (std::size_t b = 0; b < dh; ++b) {
          std::copy(sh.occupation(b), sh.occupation(b) + mh, occ.begin() + n_low);
          c(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
              psi[static_cast<Eigen::Index>(sector.index(occ.data()))];
        }
      }
    }
    g.minus[k] = c * c.adjoint();
    if (dh <= LocalizedState::kMaxPlusDimension) g.plus[n - k] = c.transpose() * c.conjugate();
    tm += std::real(g.minus[k].trace());
    tp += c.squaredNorm();
    if (g.minus[k].size()) {
      const Eigen::SelfAdjointEigenSolver<MatrixXc> es(g.minus[k], Eigen::EigenvaluesOnly);
      g.min_block_eigenvalue = std::min(g.min_block_eigenvalue, es.eigenvalues()[0]);
    }
    g.blocks[k] = std::move(c);
  }
  const double norm2 = psi.squaredNorm();
  g.normalization_defect_minus = std::abs(tm - norm2);
  g.normalization_defect_plus = std::abs(tp - norm2);
  return g;
}

MatrixXc localized_rdm(const LocalizedState& g, int n) {
  if (n < 1 || n > g.particles) throw Error(ErrorCode::InvalidArgument, "need 1 <= n <= N");
  if (g.n_low < 1) throw Error(ErrorCode::InvalidArgument, "empty low space");
  const Eigen::Index d = static_cast<Eigen::Index>(FockSector(n, g.n_low).dimension());
  MatrixXc out = MatrixXc::Zero(d, d);
  for (int k = n; k <= g.particles; ++k) {
    if (g.blocks[k].size() == 0) continue;
    out += moment_matrix(FockSector(k, g.n_low), g.blocks[k], n);
  }
  return out / binomial(g.particles, n);
}

MatrixXc restrict_to_low(const MatrixXc& gamma_n, int n, int modes, int n_low) {
  const FockSector full(n, modes), low(n, n_low);
  if (gamma_n.rows() != static_cast<Eigen::Index>(full.dimension()))
    throw Error(ErrorCode::InvalidArgument, "gamma does not match the n-particle space");
  const Eigen::Index d = static_cast<Eigen::Index>(low.dimension());
  std::vector<Eigen::Index> map(d);
  std::vector<std::uint8_t> occ(modes, 0);
  for (Eigen::Index a = 0; a < d; ++a) {
    std::fill(occ.begin(), occ.end(), 0);
    std::copy(low.occupation(a), low.occupation(a) + n_low, occ.begin());
    map[a] = static_cast<Eigen::Index>(full.index(occ.data()));
  }
  MatrixXc out(d, d);
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b) out(a, b) = gamma_n(map[a], map[b]);
  return out;
}

ReconstructionCheck check_localization(const FockSector& sector, const VectorXc& psi, int n_low,
                                       const MatrixXc& gamma1, const MatrixXc& gamma2) {
  ReconstructionCheck r;
  const auto g = localize(sector, psi, n_low);
  r.normalization_minus = g.normalization_defect_minus;
  r.normalization_plus = g.normalization_defect_plus;
  const int m = sector.modes();
  r.defect_n1 = trace_norm(restrict_to_low(gamma1, 1, m, n_low) - localized_rdm(g, 1));
  if (sector.particles() >= 2)
    r.defect_n2 = trace_norm(restrict_to_low(gamma2, 2, m, n_low) - localized_rdm(g, 2));
  r.pass = r.defect_n1 < 1e-10 && r.defect_n2 < 1e-10 && r.normalization_minus < 1e-12 &&
           r.normalization_plus < 1e-12;
  return r;
}

ReconstructionCheck check_localization(const FockSector& sector, const VectorXc& psi, int n_low) {
  const MatrixXc g1 = reduced_density_matrix(sector, psi, 1);
  const MatrixXc g2 = sector.particles() >= 2 ? reduced_density_matrix(sector, psi, 2) : MatrixXc();
  return check_localization(sector, psi, n_low, g1, g2);
}

MatrixXc definetti_moment(const MatrixXc& g, int k, int m, int dim) {
  const FockSector sk(k, dim), sm(m, dim), sp(k + m, dim);
  if (sp.dimension() > 200000) throw Error(ErrorCode::Dimension, "symmetrizer dimension too large");
  if (g.rows() != static_cast<Eigen::Index>(sk.dimension()) || g.cols() != g.rows())
    throw Error(ErrorCode::InvalidArgument, "G does not match the k-particle space");
  const Eigen::Index dm = static_cast<Eigen::Index>(sm.dimension());
  MatrixXc out = MatrixXc::Zero(dm, dm);
  const double prefactor = static_cast<double>(sk.dimension()) / static_cast<double>(sp.dimension());
  const double norm = binomial(k + m, k);
  std::vector<std::uint8_t> q(dim);
  std::vector<Eigen::Index> rows;
  std::vector<Eigen::Index> gidx;
  std::vector<double> coef;
  for (std::size_t p = 0; p < sp.dimension(); ++p) {
    const std::uint8_t* op = sp.occupation(p);
    rows.clear();
    gidx.clear();
    coef.clear();
    for (Eigen::Index a = 0; a < dm; ++a) {
      const std::uint8_t* oa = sm.occupation(a);
      bool fits = true;
      double c = 1.0;
      for (int i = 0; i < dim; ++i) {
        if (oa[i] > op[i]) {
          fits = false;
          break;
        }
        q[i] = static_cast<std::uint8_t>(op[i] - oa[i]);
        c *= binomial(op[i], oa[i]);
      }
      if (!fits) continue;
      rows.push_back(a);
      gidx.push_back(static_cast<Eigen::Index>(sk.index(q.data())));
      coef.push_back(std::sqrt(c / norm));
    }
    for (std::size_t x = 0; x < rows.size(); ++x)
      for (std::size_t y = 0; y < rows.size(); ++y)
        out(rows[x], rows[y]) += g(gidx[y], gidx[x]) * (coef[x] * coef[y]);
  }
  return prefactor * out;
}

MatrixXc definetti_moment(const LocalizedState& g, int n, int m) {
  if (g.n_low < 1) throw Error(ErrorCode::InvalidArgument, "empty low space");
  const Eigen::Index d = static_cast<Eigen::Index>(FockSector(m, g.n_low).dimension());
  MatrixXc out = MatrixXc::Zero(d, d);
  for (int k = n; k <= g.particles; ++k) {
    const double w = binomial(k, n) / binomial(g.particles, n);
    if (w == 0.0 || g.minus[k].size() == 0 || std::real(g.minus[k].trace()) == 0.0) continue;
    out += w * definetti_moment(g.minus[k], k, m, g.n_low);
  }
  return out;
}

double definetti_mass(const LocalizedState& g, int n) {
  double mass = 0.0;
  for (int k = n; k <= g.particles; ++k) mass += binomial(k, n) / binomial(g.particles, n) * g.minus_trace(k);
  return mass;
}

MonteCarloMoment haar_moment(const MatrixXc& g, int k, int m, int dim, int samples, std::uint64_t seed) {
  const FockSector sk(k, dim), sm(m, dim);
  const Eigen::Index dm = static_cast<Eigen::Index>(sm.dimension());
  const double dk = static_cast<double>(sk.dimension());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd s_re = Eigen::MatrixXd::Zero(dm, dm), s_im = s_re, q_re = s_re, q_im = s_re;
  VectorXc u(dim);
  for (int s = 0; s < samples; ++s) {
    for (int i = 0; i < dim; ++i) u[i] = cplx(gauss(rng), gauss(rng));
    u.normalize();
    const VectorXc uk = product_state(u, k);
    const VectorXc um = product_state(u, m);
    const double f = dk * std::real(uk.dot(g * uk));
    const MatrixXc x = f * (um * um.adjoint());
    s_re += x.real();
    s_im += x.imag();
    q_re += x.real().cwiseAbs2();
    q_im += x.imag().cwiseAbs2();
  }
  MonteCarloMoment r;
  r.samples = samples;
  const double n = samples;
  const Eigen::MatrixXd mr = s_re / n, mi = s_im / n;
  r.mean = MatrixXc(dm, dm);
  r.mean.real() = mr;
  r.mean.imag() = mi;
  r.stderr_re = ((q_re / n - mr.cwiseAbs2()).cwiseMax(0.0) / (n - 1)).cwiseSqrt();
  r.stderr_im = ((q_im / n - mi.cwiseAbs2()).cwiseMax(0.0) / (n - 1)).cwiseSqrt();
  return r;
}

CkmrResult ckmr_certify(const FockSector& sector, const VectorXc& psi, int k) {
  const int n = sector.particles(), dim = sector.modes();
  if (k < 1 || k > n) throw Error(ErrorCode::InvalidArgument, "need 1 <= k <= N");
  const VectorXc v = psi.normalized();
  const MatrixXc gamma = reduced_density_matrix(sector, v, k);
  const MatrixXc moment = definetti_moment(v * v.adjoint(), n, k, dim);
  CkmrResult r;
  r.particles = n;
  r.dim = dim;
  r.k = k;
  r.distance = trace_norm(gamma - moment);
  r.bound = 4.0 * k * dim / n;
  r.pass = r.distance <= r.bound;
  return r;
}

nlohmann::json CkmrResult::to_json() const {
  return {{"N", particles}, {"dim", dim}, {"k", k}, {"distance", distance}, {"bound", bound}, {"pass", pass}};
}

LocalizedGap localized_definetti_gap(const FockSector& sector, const VectorXc& psi, int n_low, int n) {
  const int big_n = sector.particles(), m = sector.modes();
  if (n < 1 || n > big_n) throw Error(ErrorCode::InvalidArgument, "need 1 <= n <= N");
  if (n_low < 1) throw Error(ErrorCode::InvalidArgument, "empty low space");
  const VectorXc v = psi.normalized();
  const auto g = localize(sector, v, n_low);
  LocalizedGap r;
  r.n = n;
  const MatrixXc projected = restrict_to_low(reduced_density_matrix(sector, v, n), n, m, n_low);
  r.distance = trace_norm(projected - definetti_moment(g, n, n));
  r.bound = 4.0 * n * n_low / big_n;
  r.asserted = n == 2;
  r.pass = !r.asserted || r.distance <= r.bound;
  r.mass = definetti_mass(g, n);
  r.mass_deficit = 1.0 - r.mass;
  r.projected_deficit = 1.0 - std::real(projected.trace());
  const MatrixXc g1 = restrict_to_low(reduced_density_matrix(sector, v, 1), 1, m, n_low);
  r.deficit_bound = n * (1.0 - std::real(g1.trace()));
  double first = 0.0;
  for (int k = 0; k <= big_n; ++k) {
    const double x = static_cast<double>(k) / big_n;
    r.jensen_lhs += x * x * g.minus_trace(k);
    first += x * g.minus_trace(k);
  }
  r.jensen_rhs = first * first;
  return r;
}

Condensation condensation_diagnostics(const MatrixXc& gamma1, const MatrixXc& gamma2, const VectorXc& c) {
  Condensation d;
  const VectorXc u = c.normalized();
  const Eigen::SelfAdjointEigenSolver<MatrixXc> es(0.5 * (gamma1 + gamma1.adjoint()), Eigen::EigenvaluesOnly);
  d.lambda_max = es.eigenvalues()[es.eigenvalues().size() - 1];
  d.overlap = std::real(u.dot(gamma1 * u));
  const VectorXc u2 = product_state(u, 2);
  d.distance = trace_norm(gamma2 - u2 * u2.adjoint());
  return d;
}

}  // namespace mflab
