#include "mflab/manybody.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mflab/convolution.hpp"

namespace mflab {

// ---------------------------------------------------------------------------
// Two-body tensor
// ---------------------------------------------------------------------------

TwoBodyTensor::TwoBodyTensor(int modes) : m_(modes) {
  if (modes < 0) throw Error(ErrorCode::InvalidArgument, "negative mode count");
  const std::size_t m = static_cast<std::size_t>(modes);
  data_.assign(m * m * m * m, cplx(0.0, 0.0));
}

bool TwoBodyTensor::is_real(double tol) const {
  for (const auto& v : data_)
    if (std::abs(v.imag()) > tol) return false;
  return true;
}

void TwoBodyTensor::symmetrize() {
  std::vector<cplx> out(data_.size());
  double defect = 0.0;
  for (int i = 0; i < m_; ++i)
    for (int j = 0; j < m_; ++j)
      for (int k = 0; k < m_; ++k)
        for (int l = 0; l < m_; ++l) {
          const cplx avg = 0.25 * ((*this)(i, j, k, l) + (*this)(j, i, l, k) + std::conj((*this)(k, l, i, j)) +
                                   std::conj((*this)(l, k, j, i)));
          defect = std::max(defect, std::abs(avg - (*this)(i, j, k, l)));
          out[idx_(i, j, k, l)] = avg;
        }
  data_ = std::move(out);
  symmetry_defect_ = defect;
}

double TwoBodyTensor::max_asymmetry() const {
  double d = 0.0;
  for (int i = 0; i < m_; ++i)
    for (int j = 0; j < m_; ++j)
      for (int k = 0; k < m_; ++k)
        for (int l = 0; l < m_; ++l) {
          const cplx v = (*this)(i, j, k, l);
          d = std::max(d, std::abs(v - std::conj((*this)(k, l, i, j))));
          d = std::max(d, std::abs(v - (*this)(j, i, l, k)));
        }
  return d;
}

TwoBodyTensor TwoBodyTensor::truncated(int m) const {
  if (m > m_) throw Error(ErrorCode::InvalidArgument, "cannot truncate to more modes");
  TwoBodyTensor t(m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) t(i, j, k, l) = (*this)(i, j, k, l);
  t.symmetry_defect_ = symmetry_defect_;
  return t;
}

TwoBodyTensor build_two_body_tensor(const OneBodyModel& model, const InteractionPotential& wn, int modes) {
  if (modes < 1 || modes > model.modes())
    throw Error(ErrorCode::InvalidArgument, "tensor needs 1 <= M <= computed modes");
  const Grid& g = model.grid();
  if (wn.dimension() != g.dim) throw Error(ErrorCode::InvalidArgument, "potential and grid dimensions differ");
  TwoBodyTensor t(modes);
  if (wn.is_zero()) return t;
  if (wn.width() < 2.0 * g.spacing())
    throw Error(ErrorCode::Resolution, "w_N width " + std::to_string(wn.width()) + " is below two grid cells (h = " +
                                           std::to_string(g.spacing()) + ")");
  const PairConvolver conv(g, wn);
  const Eigen::Index p = static_cast<Eigen::Index>(g.size());
  const auto& phi = model.eigenvectors();
  const int m = modes;
  MatrixXc f(p, m * m), gm(p, m * m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      const VectorXc prod = phi.col(a).conjugate().cwiseProduct(phi.col(b));
      f.col(a * m + b) = prod;
      const Eigen::VectorXd re = conv.apply(prod.real());
      const Eigen::VectorXd im = conv.apply(prod.imag());
      for (Eigen::Index x = 0; x < p; ++x) gm(x, a * m + b) = cplx(re[x], im[x]);
    }
  const MatrixXc w = g.cell_volume() * (f.transpose() * gm);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) t(i, j, k, l) = w(i * m + k, j * m + l);
  t.symmetrize();
  return t;
}

TwoBodyTensor build_two_body_tensor(const OneBodyModel& model, const InteractionPotential& w, double n, double beta,
                                    int modes) {
  return build_two_body_tensor(model, w.scaled(n, beta), modes);
}

MatrixXc one_body_matrix(const OneBodyModel& model, int modes) {
  if (modes < 1 || modes > model.modes()) throw Error(ErrorCode::InvalidArgument, "bad mode count");
  MatrixXc h = MatrixXc::Zero(modes, modes);
  for (int i = 0; i < modes; ++i) h(i, i) = model.eigenvalues()[i];
  return h;
}

// ---------------------------------------------------------------------------
// Hamiltonian
// ---------------------------------------------------------------------------

namespace {

constexpr Eigen::Index kChunk = 4096;

std::vector<std::pair<int, int>> pair_list(int m) {
  std::vector<std::pair<int, int>> p;
  for (int k = 0; k < m; ++k)
    for (int l = k; l < m; ++l) p.emplace_back(k, l);
  return p;
}

}  // namespace

FockHamiltonian::FockHamiltonian(int particles, const MatrixXc& h, const TwoBodyTensor& w)
    : s0_(particles, static_cast<int>(h.rows())),
      s1_(std::max(particles - 1, 0), static_cast<int>(h.rows())),
      s2_(std::max(particles - 2, 0), static_cast<int>(h.rows())) {
  const int m = static_cast<int>(h.rows());
  if (particles < 1) throw Error(ErrorCode::InvalidArgument, "Hamiltonian needs N >= 1");
  if (h.cols() != m || w.modes() != m) throw Error(ErrorCode::InvalidArgument, "h and W mode counts differ");
  if ((h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + h.cwiseAbs().maxCoeff()))
    throw Error(ErrorCode::InvalidArgument, "one-body matrix is not Hermitian");
  if (s0_.dimension() > static_cast<std::size_t>(INT32_MAX)) throw Error(ErrorCode::Dimension, "sector too large");

  real_ = h.imag().cwiseAbs().maxCoeff() == 0.0 && w.is_real();
  h_ = h;
  hr_ = h.real();

  const std::size_t d1 = s1_.dimension();
  raise1_.resize(d1 * m);
  amp1_.resize(d1 * m);
  std::vector<std::uint8_t> occ(m);
  for (std::size_t t = 0; t < d1; ++t) {
    const std::uint8_t* o = s1_.occupation(t);
    for (int j = 0; j < m; ++j) {
      std::copy(o, o + m, occ.begin());
      ++occ[j];
      raise1_[t * m + j] = static_cast<std::int32_t>(s0_.index(occ.data()));
      amp1_[t * m + j] = std::sqrt(o[j] + 1.0);
    }
  }

  if (particles >= 2) {
    prefactor_ = 1.0 / (2.0 * (particles - 1));
    const auto pl = pair_list(m);
    pairs_ = static_cast<int>(pl.size());
    wp_ = MatrixXc::Zero(pairs_, pairs_);
    auto orderings = [](std::pair<int, int> q) {
      std::vector<std::pair<int, int>> v{q};
      if (q.first != q.second) v.emplace_back(q.second, q.first);
      return v;
    };
    for (int q = 0; q < pairs_; ++q)
      for (int p = 0; p < pairs_; ++p) {
        cplx sum = 0.0;
        for (auto [i, j] : orderings(pl[q]))
          for (auto [k, l] : orderings(pl[p])) sum += w(i, j, k, l);
        wp_(q, p) = sum;
      }
    wpr_ = wp_.real();

    const std::size_t d2 = s2_.dimension();
    raise2_.resize(d2 * pairs_);
    amp2_.resize(d2 * pairs_);
    for (std::size_t s = 0; s < d2; ++s) {
      const std::uint8_t* o = s2_.occupation(s);
      for (int p = 0; p < pairs_; ++p) {
        const auto [k, l] = pl[p];
        std::copy(o, o + m, occ.begin());
        ++occ[k];
        ++occ[l];
        raise2_[s * pairs_ + p] = static_cast<std::int32_t>(s0_.index(occ.data()));
        amp2_[s * pairs_ + p] =
            k == l ? std::sqrt((o[k] + 1.0) * (o[k] + 2.0)) : std::sqrt((o[k] + 1.0) * (o[l] + 1.0));
      }
    }
  }
}

template <class S>
void FockHamiltonian::apply_(const S* in, S* out) const {
  using RowMat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
  const Mat* hm;
  const Mat* wm;
  if constexpr (std::is_same_v<S, double>) {
    hm = &hr_;
    wm = &wpr_;
  } else {
    hm = &h_;
    wm = &wp_;
  }
  const Eigen::Index m = modes();
  const Eigen::Index dim = static_cast<Eigen::Index>(s0_.dimension());
  std::fill(out, out + dim, S(0));

  auto run = [&](Eigen::Index rows, Eigen::Index width, const std::vector<std::int32_t>& raise,
                 const std::vector<double>& amp, const Mat& coef, double scale) {
    RowMat phi(std::min(kChunk, rows), width), x;
    for (Eigen::Index start = 0; start < rows; start += kChunk) {
      const Eigen::Index len = std::min(kChunk, rows - start);
      if (phi.rows() != len) phi.resize(len, width);
      for (Eigen::Index r = 0; r < len; ++r) {
        const std::size_t base = static_cast<std::size_t>(start + r) * width;
        for (Eigen::Index c = 0; c < width; ++c) phi(r, c) = amp[base + c] * in[raise[base + c]];
      }
      x.noalias() = phi * coef.transpose();
      for (Eigen::Index r = 0; r < len; ++r) {
        const std::size_t base = static_cast<std::size_t>(start + r) * width;
        for (Eigen::Index c = 0; c < width; ++c) out[raise[base + c]] += (scale * amp[base + c]) * x(r, c);
      }
    }
  };
  run(static_cast<Eigen::Index>(s1_.dimension()), m, raise1_, amp1_, *hm, 1.0);
  if (particles() >= 2) run(static_cast<Eigen::Index>(s2_.dimension()), pairs_, raise2_, amp2_, *wm, prefactor_);
}

void FockHamiltonian::apply(const VectorXc& in, VectorXc& out) const {
  if (in.size() != static_cast<Eigen::Index>(s0_.dimension())) throw Error(ErrorCode::InvalidArgument, "size mismatch");
  out.resize(in.size());
  apply_<cplx>(in.data(), out.data());
}

void FockHamiltonian::apply(const Eigen::VectorXd& in, Eigen::VectorXd& out) const {
  if (!real_) throw Error(ErrorCode::InvalidArgument, "real apply on a complex Hamiltonian");
  if (in.size() != static_cast<Eigen::Index>(s0_.dimension())) throw Error(ErrorCode::InvalidArgument, "size mismatch");
  out.resize(in.size());
  apply_<double>(in.data(), out.data());
}

double FockHamiltonian::expectation(const VectorXc& psi) const {
  VectorXc hp;
  apply(psi, hp);
  return std::real(psi.dot(hp)) / psi.squaredNorm();
}

MatrixXc FockHamiltonian::dense() const {
  const Eigen::Index d = static_cast<Eigen::Index>(s0_.dimension());
  if (d > 6000) throw Error(ErrorCode::Dimension, "dense Hamiltonian refused above 6000 rows");
  MatrixXc out(d, d);
  VectorXc e = VectorXc::Zero(d), col;
  for (Eigen::Index j = 0; j < d; ++j) {
    e[j] = 1.0;
    apply(e, col);
    out.col(j) = col;
    e[j] = 0.0;
  }
  return out;
}

GroundStateResult ground_state(const FockHamiltonian& h, const LanczosOptions& opt) {
  const Eigen::Index d = static_cast<Eigen::Index>(h.sector().dimension());
  GroundStateResult g;
  if (d <= 400) {
    const Eigen::SelfAdjointEigenSolver<MatrixXc> es(h.dense());
    g.energy = es.eigenvalues()[0];
    g.vector = es.eigenvectors().col(0);
    VectorXc hv;
    h.apply(g.vector, hv);
    g.residual = (hv - g.energy * g.vector).norm();
    g.converged = g.residual < opt.tolerance * (1.0 + std::abs(g.energy));
    return g;
  }
  if (h.is_real()) {
    auto op = [&h](const Eigen::VectorXd& a, Eigen::VectorXd& b) { h.apply(a, b); };
    const auto r = lanczos_lowest<double>(op, d, opt);
    g.energy = r.value;
    g.vector = r.vector.cast<cplx>();
    g.residual = r.residual;
    g.matvecs = r.matvecs;
    g.restarts = r.restarts;
    g.converged = r.converged;
  } else {
    auto op = [&h](const VectorXc& a, VectorXc& b) { h.apply(a, b); };
    const auto r = lanczos_lowest<cplx>(op, d, opt);
    g.energy = r.value;
    g.vector = r.vector;
    g.residual = r.residual;
    g.matvecs = r.matvecs;
    g.restarts = r.restarts;
    g.converged = r.converged;
  }
  return g;
}

// ---------------------------------------------------------------------------
// Reduced density matrices
// ---------------------------------------------------------------------------

MatrixXc moment_matrix(const FockSector& sector, const MatrixXc& columns, int k) {
  const int n = sector.particles(), m = sector.modes();
  if (k < 0 || k > n) throw Error(ErrorCode::InvalidArgument, "need 0 <= k <= N");
  if (columns.rows() != static_cast<Eigen::Index>(sector.dimension()))
    throw Error(ErrorCode::InvalidArgument, "state does not match the sector");
  const FockSector sk(k, m), sr(n - k, m);
  if (sk.dimension() > 20000) throw Error(ErrorCode::Dimension, "k-body space too large");
  const Eigen::Index dk = static_cast<Eigen::Index>(sk.dimension());
  const Eigen::Index dr = static_cast<Eigen::Index>(sr.dimension());

  std::vector<std::vector<double>> sb(n + 1, std::vector<double>(n + 1, 0.0));
  for (int a = 0; a <= n; ++a)
    for (int b = 0; b <= a; ++b) sb[a][b] = std::sqrt(binomial(a, b));

  // index and coefficient of s + m for every (s, m)
  std::vector<std::int32_t> target(static_cast<std::size_t>(dr) * dk);
  std::vector<double> coef(static_cast<std::size_t>(dr) * dk);
  std::vector<std::uint8_t> occ(m);
  for (Eigen::Index s = 0; s < dr; ++s) {
    const std::uint8_t* os = sr.occupation(s);
    for (Eigen::Index c = 0; c < dk; ++c) {
      const std::uint8_t* om = sk.occupation(c);
      double cf = 1.0;
      for (int i = 0; i < m; ++i) {
        occ[i] = static_cast<std::uint8_t>(os[i] + om[i]);
        cf *= sb[occ[i]][om[i]];
      }
      target[s * dk + c] = static_cast<std::int32_t>(sector.index(occ.data()));
      coef[s * dk + c] = cf;
    }
  }

  MatrixXc acc = MatrixXc::Zero(dk, dk);
  MatrixXc v;
  for (Eigen::Index col = 0; col < columns.cols(); ++col) {
    for (Eigen::Index start = 0; start < dr; start += kChunk) {
      const Eigen::Index len = std::min(kChunk, dr - start);
      v.resize(len, dk);
      for (Eigen::Index r = 0; r < len; ++r)
        for (Eigen::Index c = 0; c < dk; ++c) {
          const std::size_t at = static_cast<std::size_t>(start + r) * dk + c;
          v(r, c) = coef[at] * columns(target[at], col);
        }
      acc.noalias() += v.transpose() * v.conjugate();
    }
  }
  return acc;
}

MatrixXc reduced_density_matrix(const FockSector& sector, const VectorXc& psi, int k) {
  MatrixXc g = moment_matrix(sector, psi, k) / binomial(sector.particles(), k);
  return 0.5 * (g + g.adjoint());
}

MatrixXc partial_trace(const MatrixXc& gamma_k, int k, int modes) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "partial trace needs k >= 1");
  const FockSector sk(k, modes), sl(k - 1, modes);
  if (gamma_k.rows() != static_cast<Eigen::Index>(sk.dimension()))
    throw Error(ErrorCode::InvalidArgument, "gamma does not match the k-particle space");
  const Eigen::Index d = static_cast<Eigen::Index>(sl.dimension());
  MatrixXc out = MatrixXc::Zero(d, d);
  std::vector<std::uint8_t> a(modes), b(modes);
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index c = 0; c < d; ++c) {
      cplx sum = 0.0;
      for (int i = 0; i < modes; ++i) {
        std::copy(sl.occupation(r), sl.occupation(r) + modes, a.begin());
        std::copy(sl.occupation(c), sl.occupation(c) + modes, b.begin());
        const double f = std::sqrt((a[i] + 1.0) * (b[i] + 1.0));
        ++a[i];
        ++b[i];
        sum += f * gamma_k(static_cast<Eigen::Index>(sk.index(a.data())), static_cast<Eigen::Index>(sk.index(b.data())));
      }
      out(r, c) = sum / static_cast<double>(k);
    }
  return out;
}

EnergyIdentity energy_identity_check(const FockHamiltonian& hn, const VectorXc& psi, const MatrixXc& h,
                                     const TwoBodyTensor& w, const MatrixXc& gamma2) {
  const int n = hn.particles();
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "energy identity needs N >= 2");
  EnergyIdentity e;
  e.expectation = hn.expectation(psi) / n;
  const MatrixXc h2 = FockHamiltonian(2, h, w).dense();
  e.half_trace = 0.5 * std::real(h2.cwiseProduct(gamma2.transpose()).sum());
  e.defect = std::abs(e.expectation - e.half_trace);
  e.relative = e.defect / (1.0 + std::abs(e.expectation));
  return e;
}

EnergyIdentity energy_identity_check(const FockHamiltonian& hn, const VectorXc& psi, const MatrixXc& h,
                                     const TwoBodyTensor& w) {
  if (hn.particles() < 2) throw Error(ErrorCode::InvalidArgument, "energy identity needs N >= 2");
  return energy_identity_check(hn, psi, h, w, reduced_density_matrix(hn.sector(), psi.normalized(), 2));
}

// ---------------------------------------------------------------------------
// Hartree energy in the mode span
// ---------------------------------------------------------------------------

namespace {

MatrixXc pair_matrix(const TwoBodyTensor& w) {
  const int m = w.modes();
  MatrixXc b(m * m, m * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) b(i * m + j, k * m + l) = w(i, j, k, l);
  return b;
}

VectorXc pair_vector(const VectorXc& c) {
  const Eigen::Index m = c.size();
  VectorXc a(m * m);
  for (Eigen::Index k = 0; k < m; ++k)
    for (Eigen::Index l = 0; l < m; ++l) a[k * m + l] = c[k] * c[l];
  return a;
}

struct CoeffEval {
  double energy;
  VectorXc grad;  // derivative with respect to conj(c)
};

CoeffEval evaluate(const MatrixXc& h, const MatrixXc& b, const VectorXc& c) {
  const Eigen::Index m = c.size();
  const VectorXc a = pair_vector(c);
  const VectorXc ba = b * a;
  CoeffEval ev;
  const VectorXc hc = h * c;
  ev.energy = std::real(c.dot(hc)) + 0.5 * std::real(a.dot(ba));
  ev.grad = hc;
  for (Eigen::Index i = 0; i < m; ++i) {
    cplx s = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) s += ba[i * m + j] * std::conj(c[j]);
    ev.grad[i] += s;
  }
  return ev;
}

}  // namespace

double hartree_coefficient_energy(const MatrixXc& h, const TwoBodyTensor& w, const VectorXc& c) {
  return evaluate(h, pair_matrix(w), c / c.norm()).energy;
}

HartreeCoefficients minimize_hartree_coefficients(const MatrixXc& h, const TwoBodyTensor& w, int starts,
                                                  std::uint64_t seed) {
  const Eigen::Index m = h.rows();
  if (w.modes() != m) throw Error(ErrorCode::InvalidArgument, "h and W mode counts differ");
  const MatrixXc b = pair_matrix(w);
  const bool real = h.imag().cwiseAbs().maxCoeff() == 0.0 && w.is_real();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double scale = 1.0 + h.cwiseAbs().maxCoeff() + b.cwiseAbs().maxCoeff();

  HartreeCoefficients best;
  best.energy = std::numeric_limits<double>::infinity();
  for (int st = 0; st <= starts; ++st) {
    VectorXc c = VectorXc::Zero(m);
    if (st == 0) {
      const Eigen::SelfAdjointEigenSolver<MatrixXc> es(h);
      c = es.eigenvectors().col(0);
    } else {
      for (Eigen::Index i = 0; i < m; ++i) c[i] = real ? cplx(gauss(rng), 0.0) : cplx(gauss(rng), gauss(rng));
    }
    c.normalize();
    auto ev = evaluate(h, b, c);
    double tau = 0.5 / scale;
    int it = 0;
    double gnorm = 0.0;
    for (; it < 50000; ++it) {
      const cplx mu = c.dot(ev.grad);
      const VectorXc g = ev.grad - mu * c;
      gnorm = g.norm();
      if (gnorm < 1e-11 * scale) break;
      bool moved = false;
      for (int bt = 0; bt < 60; ++bt) {
        VectorXc trial = c - tau * g;
        trial.normalize();
        const auto tv = evaluate(h, b, trial);
        if (tv.energy <= ev.energy - 1e-4 * tau * gnorm * gnorm) {
          c = trial;
          ev = tv;
          tau *= 1.5;
          moved = true;
          break;
        }
        tau *= 0.5;
      }
      if (!moved) break;
    }
    if (ev.energy < best.energy) {
      best.energy = ev.energy;
      best.c = c;
      best.gradient_norm = gnorm;
      best.iterations = it;
    }
  }
  return best;
}

VariationalGap variational_gap(double e_per_particle, const MatrixXc& h, const TwoBodyTensor& w, std::uint64_t seed) {
  VariationalGap v;
  v.e_many = e_per_particle;
  v.e_hartree = minimize_hartree_coefficients(h, w, 4, seed).energy;
  v.gap = v.e_hartree - v.e_many;
  v.holds = v.gap > -1e-10;
  return v;
}

// ---------------------------------------------------------------------------
// Truncated two-body inequality
// ---------------------------------------------------------------------------

double truncation_cutoff_rule(int dim, double n, double beta, double epsilon, double c_const) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must lie in (0, 1]");
  if (dim == 1 && beta > 0.0) return c_const / (epsilon * epsilon);
  return c_const * std::pow(n, dim * beta) / epsilon;
}

TruncationCheck truncation_inequality_check(const OneBodyModel& model, const InteractionPotential& w, double n,
                                            double beta, double cutoff, double epsilon, double c_const) {
  TruncationCheck t;
  const int k = model.modes();
  const auto split = spectral_split(model, cutoff);
  t.cutoff = split.cutoff;
  t.required = truncation_cutoff_rule(model.dim(), n, beta, epsilon, c_const);
  t.precondition = t.cutoff >= t.required;
  t.flagged = !t.precondition;
  t.n_low = std::min(split.n_low, k);
  t.modes = k;

  const InteractionPotential wn = w.scaled(n, beta);
  const MatrixXc h = one_body_matrix(model, k);
  const MatrixXc lhs = FockHamiltonian(2, h, build_two_body_tensor(model, wn, k)).dense();
  const MatrixXc mod = FockHamiltonian(2, h, build_two_body_tensor(model, wn.modified(epsilon), k)).dense();
  MatrixXc hp = MatrixXc::Zero(k, k);
  for (int i = t.n_low; i < k; ++i) hp(i, i) = h(i, i);
  const MatrixXc high = FockHamiltonian(2, hp, TwoBodyTensor(k)).dense();

  const FockSector s2(2, k);
  const Eigen::Index d = static_cast<Eigen::Index>(s2.dimension());
  Eigen::VectorXd low = Eigen::VectorXd::Zero(d);
  for (Eigen::Index r = 0; r < d; ++r) {
    bool only_low = true;
    for (int i = t.n_low; i < k; ++i)
      if (s2.occupation(r)[i]) only_low = false;
    low[r] = only_low ? 1.0 : 0.0;
  }
  MatrixXc defect = lhs - low.asDiagonal() * mod * low.asDiagonal() - 0.5 * high;
  defect = 0.5 * (defect + defect.adjoint()).eval();
  const Eigen::SelfAdjointEigenSolver<MatrixXc> es(defect, Eigen::EigenvaluesOnly);
  t.min_eigenvalue = es.eigenvalues()[0];
  t.pass = t.min_eigenvalue >= -1e-9;
  return t;
}

nlohmann::json TruncationCheck::to_json() const {
  return {{"cutoff", cutoff},
          {"required_cutoff", required},
          {"precondition", precondition},
          {"flag", flagged ? "EXPECTED_POSSIBLE_FAILURE" : "NONE"},
          {"n_low", n_low},
          {"modes", modes},
          {"min_eigenvalue", min_eigenvalue},
          {"pass", pass}};
}

}  // namespace mflab
