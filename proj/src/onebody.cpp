#include "mflab/onebody.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mflab/lanczos.hpp"

namespace mflab {

namespace {

constexpr double kPi = std::numbers::pi;

const char* kind_name(TrapKind k) {
  switch (k) {
    case TrapKind::Harmonic: return "harmonic";
    case TrapKind::PowerLaw: return "power";
    case TrapKind::Box: return "box";
    case TrapKind::Tabulated: return "tabulated";
  }
  return "?";
}

// Solve (T - sigma) x = b for the tridiagonal T = tridiag(off, diag, off).
Eigen::VectorXd thomas(const Eigen::VectorXd& diag, double off, double sigma, const Eigen::VectorXd& b) {
  const Eigen::Index n = diag.size();
  Eigen::VectorXd c(n), d(n), x(n);
  double den = diag[0] - sigma;
  if (std::abs(den) < 1e-300) den = 1e-300;
  c[0] = off / den;
  d[0] = b[0] / den;
  for (Eigen::Index i = 1; i < n; ++i) {
    den = diag[i] - sigma - off * c[i - 1];
    if (std::abs(den) < 1e-300) den = 1e-300;
    c[i] = off / den;
    d[i] = (b[i] - off * d[i - 1]) / den;
  }
  x[n - 1] = d[n - 1];
  for (Eigen::Index i = n - 2; i >= 0; --i) x[i] = d[i] - c[i] * x[i + 1];
  return x;
}

// Normalized Hermite functions h_0..h_{count-1} at x.
std::vector<double> hermite_functions(int count, double x) {
  std::vector<double> h(std::max(count, 1));
  h[0] = std::pow(kPi, -0.25) * std::exp(-0.5 * x * x);
  if (count > 1) h[1] = std::sqrt(2.0) * x * h[0];
  for (int n = 1; n + 1 < count; ++n)
    h[n + 1] = std::sqrt(2.0 / (n + 1)) * x * h[n] - std::sqrt(static_cast<double>(n) / (n + 1)) * h[n - 1];
  return h;
}

void fix_phase(VectorXc& v) {
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  const cplx p = v[imax] / std::abs(v[imax]);
  v /= p;
}

void orthonormalize(MatrixXc& vecs, double vol) {
  for (Eigen::Index k = 0; k < vecs.cols(); ++k) {
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index j = 0; j < k; ++j) vecs.col(k) -= vecs.col(j) * (vol * vecs.col(j).dot(vecs.col(k)));
    vecs.col(k) /= std::sqrt(vol * vecs.col(k).squaredNorm());
  }
}

}  // namespace

void TrapConfig::validate() const {
  if (dim != 1 && dim != 2) throw Error(ErrorCode::InvalidArgument, "trap dimension must be 1 or 2");
  if (kind != TrapKind::Box && !(exponent > 0.0)) throw Error(ErrorCode::InvalidArgument, "trap exponent s must be > 0");
  if (kind == TrapKind::Harmonic && exponent != 2.0) throw Error(ErrorCode::InvalidArgument, "harmonic trap has s = 2");
  if ((kind == TrapKind::Harmonic || kind == TrapKind::PowerLaw) && !(coefficient > 0.0))
    throw Error(ErrorCode::InvalidArgument, "trap coefficient must be > 0");
  if (!(lower_c > 0.0) || lower_C < 0.0) throw Error(ErrorCode::InvalidArgument, "need c > 0 and C >= 0");
  if (omega < 0.0) throw Error(ErrorCode::InvalidArgument, "field strength must be >= 0");
  if (dim == 1 && omega != 0.0) throw Error(ErrorCode::InvalidArgument, "a magnetic field needs d = 2");
  for (double v : values)
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "tabulated potential must be finite at every node");
}

double TrapConfig::potential(const std::array<double, 3>& x) const {
  double r2 = 0.0;
  for (int a = 0; a < dim; ++a) r2 += x[a] * x[a];
  switch (kind) {
    case TrapKind::Harmonic: return coefficient * r2;
    case TrapKind::PowerLaw: return coefficient * std::pow(std::sqrt(r2), exponent);
    case TrapKind::Box: return 0.0;
    case TrapKind::Tabulated: break;
  }
  throw Error(ErrorCode::InvalidArgument, "tabulated potentials are only defined at grid nodes");
}

double TrapConfig::weyl_exponent() const {
  if (kind == TrapKind::Box) return dim / 2.0;
  return dim / exponent + dim / 2.0;
}

double TrapConfig::sup_negative_part() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, -v);
  return m;
}

nlohmann::json TrapConfig::to_json() const {
  nlohmann::json j = {{"dimension", dim}, {"kind", kind_name(kind)}, {"coefficient", coefficient},
                      {"lower_c", lower_c}, {"lower_C", lower_C}, {"omega", omega}};
  if (kind != TrapKind::Box) j["exponent"] = exponent;
  if (kind == TrapKind::Tabulated) j["values"] = values;
  return j;
}

TrapConfig TrapConfig::from_json(const nlohmann::json& j) {
  TrapConfig t;
  t.dim = j.value("dimension", 1);
  const std::string kind = j.value("kind", std::string("harmonic"));
  if (kind == "harmonic") t.kind = TrapKind::Harmonic;
  else if (kind == "power") t.kind = TrapKind::PowerLaw;
  else if (kind == "box") t.kind = TrapKind::Box;
  else if (kind == "tabulated") t.kind = TrapKind::Tabulated;
  else throw Error(ErrorCode::Config, "unknown trap kind '" + kind + "'");
  t.exponent = j.value("exponent", 2.0);
  t.coefficient = j.value("coefficient", 1.0);
  t.lower_c = j.value("lower_c", 1.0);
  t.lower_C = j.value("lower_C", 0.0);
  t.omega = j.value("omega", 0.0);
  if (j.contains("values")) t.values = j.at("values").get<std::vector<double>>();
  t.validate();
  return t;
}

OneBodyModel::OneBodyModel(TrapConfig trap, const GridSpec& spec) : trap_(std::move(trap)) {
  trap_.validate();
  if (!(spec.extent > 0.0)) throw Error(ErrorCode::InvalidArgument, "grid extent must be positive");
  if (spec.points < 3) throw Error(ErrorCode::InvalidArgument, "grid needs at least 3 points per axis");
  if (spec.modes < 1) throw Error(ErrorCode::InvalidArgument, "at least one mode is required");
  grid_ = Grid{trap_.dim, spec.points, spec.extent};
  if (static_cast<std::size_t>(spec.modes) > grid_.size())
    throw Error(ErrorCode::InvalidArgument, "more modes requested than grid nodes");
  build_potential_();
  analytic_ = spec.analytic;
  if (analytic_) solve_analytic_(spec);
  else solve_grid_(spec);
  if (spec.check_leakage && trap_.kind != TrapKind::Box) {
    const double leak = boundary_leakage();
    if (leak > 1e-8)
      throw Error(ErrorCode::Leakage, "eigenfunctions reach the grid boundary (relative amplitude " +
                                          std::to_string(leak) + "); enlarge the extent");
  }
}

void OneBodyModel::build_potential_() {
  const std::size_t n = grid_.size();
  potential_.resize(n);
  if (trap_.kind == TrapKind::Tabulated) {
    if (trap_.values.size() != n)
      throw Error(ErrorCode::InvalidArgument, "tabulated potential must list one value per grid node");
    for (std::size_t i = 0; i < n; ++i) potential_[i] = trap_.values[i];
    return;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = grid_.unflatten(i);
    std::array<double, 3> x{0, 0, 0};
    for (int a = 0; a < grid_.dim; ++a) x[a] = grid_.coord(c[a]);
    potential_[i] = trap_.potential(x);
  }
}

Eigen::VectorXd fd_eigenvalues_1d(const TrapConfig& trap, double extent, int points) {
  const Grid g{1, points, extent};
  const double h = g.spacing();
  Eigen::VectorXd diag(points), off = Eigen::VectorXd::Constant(points - 1, -1.0 / (h * h));
  for (int j = 0; j < points; ++j) {
    const double v = trap.kind == TrapKind::Tabulated ? trap.values.at(j) : trap.potential({g.coord(j), 0, 0});
    diag[j] = 2.0 / (h * h) + v;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

void OneBodyModel::solve_grid_(const GridSpec& spec) {
  const int n = grid_.points;
  const double h = grid_.spacing();
  const double vol = grid_.cell_volume();
  if (grid_.dim == 1) {
    Eigen::VectorXd diag = potential_.array() + 2.0 / (h * h);
    const double off = -1.0 / (h * h);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, Eigen::VectorXd::Constant(n - 1, off), Eigen::EigenvaluesOnly);
    eigenvalues_ = es.eigenvalues();
    eigenvectors_.resize(n, spec.modes);
    for (int k = 0; k < spec.modes; ++k) {
      const double lam = eigenvalues_[k];
      const double sigma = lam - 1e-9 * (1.0 + std::abs(lam));
      Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
      for (int j = 0; j < n; ++j) x[j] += 0.01 * std::sin(1.7 * j + k);
      for (int it = 0; it < 4; ++it) {
        x = thomas(diag, off, sigma, x);
        for (int j = 0; j < k; ++j) x -= eigenvectors_.col(j).real() * (vol * eigenvectors_.col(j).real().dot(x));
        x /= std::sqrt(vol * x.squaredNorm());
      }
      VectorXc v = x.cast<cplx>();
      fix_phase(v);
      eigenvectors_.col(k) = v;
    }
    orthonormalize(eigenvectors_, vol);
    if (spec.richardson) {
      const Eigen::VectorXd fine = fd_eigenvalues_1d(trap_, grid_.extent, 2 * n + 1);
      const Eigen::VectorXd coarse = eigenvalues_;
      for (int k = 0; k < n; ++k) eigenvalues_[k] = (4.0 * fine[k] - coarse[k]) / 3.0;
      richardson_shift_ = eigenvalues_[0] - coarse[0];
    }
    return;
  }

  LanczosOptions lo;
  lo.krylov = 200;
  lo.max_restarts = 400;
  lo.tolerance = 1e-10;
  const Eigen::Index size = static_cast<Eigen::Index>(grid_.size());
  eigenvalues_.resize(spec.modes);
  eigenvectors_.resize(size, spec.modes);
  if (!is_complex()) {
    std::vector<Eigen::VectorXd> found;
    auto op = [this](const Eigen::VectorXd& in, Eigen::VectorXd& out) { out = apply_real(in); };
    for (int k = 0; k < spec.modes; ++k) {
      lo.seed = 1000 + k;
      auto r = lanczos_lowest<double>(op, size, lo, found);
      eigenvalues_[k] = r.value;
      found.push_back(r.vector);
    }
    // sort (deflation can return near-degenerate levels out of order)
    std::vector<int> order(spec.modes);
    for (int k = 0; k < spec.modes; ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return eigenvalues_[a] < eigenvalues_[b]; });
    Eigen::VectorXd ev = eigenvalues_;
    for (int k = 0; k < spec.modes; ++k) {
      eigenvalues_[k] = ev[order[k]];
      VectorXc v = found[order[k]].cast<cplx>();
      fix_phase(v);
      eigenvectors_.col(k) = v / std::sqrt(vol);
    }
  } else {
    std::vector<VectorXc> found;
    auto op = [this](const VectorXc& in, VectorXc& out) { out = apply(in); };
    for (int k = 0; k < spec.modes; ++k) {
      lo.seed = 1000 + k;
      auto r = lanczos_lowest<cplx>(op, size, lo, found);
      eigenvalues_[k] = r.value;
      found.push_back(r.vector);
    }
    std::vector<int> order(spec.modes);
    for (int k = 0; k < spec.modes; ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return eigenvalues_[a] < eigenvalues_[b]; });
    Eigen::VectorXd ev = eigenvalues_;
    for (int k = 0; k < spec.modes; ++k) {
      eigenvalues_[k] = ev[order[k]];
      VectorXc v = found[order[k]];
      fix_phase(v);
      eigenvectors_.col(k) = v / std::sqrt(vol);
    }
  }
  orthonormalize(eigenvectors_, vol);
}

void OneBodyModel::solve_analytic_(const GridSpec& spec) {
  if (trap_.omega != 0.0) throw Error(ErrorCode::InvalidArgument, "analytic mode does not support a magnetic field");
  const int d = grid_.dim;
  const std::size_t size = grid_.size();
  const int m = spec.modes;
  // enumerate index tuples in ascending energy
  struct Level {
    double e;
    int k1, k2;
  };
  std::vector<Level> levels;
  const int kmax = m + 2;
  if (trap_.kind == TrapKind::Harmonic) {
    const double om = std::sqrt(trap_.coefficient);
    for (int a = 0; a < kmax; ++a)
      for (int b = 0; b < (d == 2 ? kmax : 1); ++b)
        levels.push_back({om * (d == 1 ? 2 * a + 1 : 2 * (a + b + 1)), a, b});
  } else if (trap_.kind == TrapKind::Box) {
    const double q = kPi / (2.0 * grid_.extent);
    for (int a = 1; a <= kmax; ++a)
      for (int b = 1; b <= (d == 2 ? kmax : 1); ++b)
        levels.push_back({q * q * (a * a + (d == 2 ? b * b : 0)), a, b});
  } else {
    throw Error(ErrorCode::InvalidArgument, "analytic mode needs a harmonic or box trap");
  }
  std::stable_sort(levels.begin(), levels.end(), [](const Level& x, const Level& y) {
    if (x.e != y.e) return x.e < y.e;
    return x.k2 < y.k2;
  });
  levels.resize(m);
  eigenvalues_.resize(m);
  eigenvectors_.resize(static_cast<Eigen::Index>(size), m);
  const double om = std::sqrt(trap_.coefficient);
  const double scale = std::pow(om, 0.25);
  auto axis_value = [&](int k, double x) {
    if (trap_.kind == TrapKind::Harmonic) return scale * hermite_functions(k + 1, std::sqrt(om) * x)[k];
    return std::sin(k * kPi * (x + grid_.extent) / (2.0 * grid_.extent)) / std::sqrt(grid_.extent);
  };
  for (int k = 0; k < m; ++k) {
    eigenvalues_[k] = levels[k].e;
    for (std::size_t i = 0; i < size; ++i) {
      const auto c = grid_.unflatten(i);
      double v = axis_value(levels[k].k1, grid_.coord(c[0]));
      if (d == 2) v *= axis_value(levels[k].k2, grid_.coord(c[1]));
      eigenvectors_(static_cast<Eigen::Index>(i), k) = v;
    }
  }
  orthonormalize(eigenvectors_, grid_.cell_volume());
}

int OneBodyModel::count_below(double cutoff) const {
  if (analytic_) {
    const int d = grid_.dim;
    int count = 0;
    if (trap_.kind == TrapKind::Harmonic) {
      const double om = std::sqrt(trap_.coefficient);
      for (int n = 0;; ++n) {
        const double e = d == 1 ? om * (2 * n + 1) : 2.0 * om * (n + 1);
        if (!(e < cutoff)) break;
        count += d == 1 ? 1 : n + 1;
      }
    } else {
      const double q = kPi / (2.0 * grid_.extent);
      for (int a = 1; q * q * a * a < cutoff; ++a) {
        if (d == 1) {
          ++count;
          continue;
        }
        for (int b = 1; q * q * (a * a + b * b) < cutoff; ++b) ++count;
      }
    }
    return count;
  }
  const double top = eigenvalues_[eigenvalues_.size() - 1];
  if (cutoff > top)
    throw Error(ErrorCode::InvalidArgument, "cutoff lies beyond the computed spectrum; compute more modes");
  int count = 0;
  for (Eigen::Index k = 0; k < eigenvalues_.size(); ++k)
    if (eigenvalues_[k] < cutoff) ++count;
  return count;
}

Eigen::VectorXd OneBodyModel::apply_real(const Eigen::VectorXd& u) const {
  if (is_complex()) throw Error(ErrorCode::InvalidArgument, "real application needs omega = 0");
  const int n = grid_.points;
  const double ih2 = 1.0 / (grid_.spacing() * grid_.spacing());
  Eigen::VectorXd out(u.size());
  if (grid_.dim == 1) {
    for (int j = 0; j < n; ++j) {
      double s = 2.0 * u[j];
      if (j > 0) s -= u[j - 1];
      if (j + 1 < n) s -= u[j + 1];
      out[j] = s * ih2 + potential_[j] * u[j];
    }
    return out;
  }
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * n + x;
      double s = 4.0 * u[i];
      if (x > 0) s -= u[i - 1];
      if (x + 1 < n) s -= u[i + 1];
      if (y > 0) s -= u[i - n];
      if (y + 1 < n) s -= u[i + n];
      out[i] = s * ih2 + potential_[i] * u[i];
    }
  return out;
}

VectorXc OneBodyModel::apply(const VectorXc& u) const {
  const int n = grid_.points;
  const double h = grid_.spacing();
  const double ih2 = 1.0 / (h * h);
  VectorXc out(u.size());
  if (grid_.dim == 1) {
    for (int j = 0; j < n; ++j) {
      cplx s = 2.0 * u[j];
      if (j > 0) s -= u[j - 1];
      if (j + 1 < n) s -= u[j + 1];
      out[j] = s * ih2 + potential_[j] * u[j];
    }
    return out;
  }
  const double om = trap_.omega;
  for (int y = 0; y < n; ++y) {
    // x-links carry h A_x = -omega h y, y-links carry h A_y = omega h x
    const cplx px = std::polar(1.0, -om * h * grid_.coord(y));
    for (int x = 0; x < n; ++x) {
      const cplx py = std::polar(1.0, om * h * grid_.coord(x));
      const std::size_t i = static_cast<std::size_t>(y) * n + x;
      cplx s = 4.0 * u[i];
      if (x + 1 < n) s -= px * u[i + 1];
      if (x > 0) s -= std::conj(px) * u[i - 1];
      if (y + 1 < n) s -= py * u[i + n];
      if (y > 0) s -= std::conj(py) * u[i - n];
      out[i] = s * ih2 + potential_[i] * u[i];
    }
  }
  return out;
}

Eigen::SparseMatrix<cplx> OneBodyModel::matrix() const {
  const int n = grid_.points;
  const double h = grid_.spacing();
  const double ih2 = 1.0 / (h * h);
  const Eigen::Index size = static_cast<Eigen::Index>(grid_.size());
  std::vector<Eigen::Triplet<cplx>> t;
  if (grid_.dim == 1) {
    for (int j = 0; j < n; ++j) {
      t.emplace_back(j, j, 2.0 * ih2 + potential_[j]);
      if (j > 0) t.emplace_back(j, j - 1, -ih2);
      if (j + 1 < n) t.emplace_back(j, j + 1, -ih2);
    }
  } else {
    const double om = trap_.omega;
    for (int y = 0; y < n; ++y) {
      const cplx px = std::polar(1.0, -om * h * grid_.coord(y));
      for (int x = 0; x < n; ++x) {
        const cplx py = std::polar(1.0, om * h * grid_.coord(x));
        const Eigen::Index i = static_cast<Eigen::Index>(y) * n + x;
        t.emplace_back(i, i, 4.0 * ih2 + potential_[i]);
        if (x + 1 < n) t.emplace_back(i, i + 1, -px * ih2);
        if (x > 0) t.emplace_back(i, i - 1, -std::conj(px) * ih2);
        if (y + 1 < n) t.emplace_back(i, i + n, -py * ih2);
        if (y > 0) t.emplace_back(i, i - n, -std::conj(py) * ih2);
      }
    }
  }
  Eigen::SparseMatrix<cplx> m(size, size);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

double OneBodyModel::hermiticity_defect() const {
  const auto m = matrix();
  Eigen::SparseMatrix<cplx> adj = m.adjoint();
  Eigen::SparseMatrix<cplx> diff = m - adj;
  double worst = 0.0;
  for (int k = 0; k < diff.outerSize(); ++k)
    for (Eigen::SparseMatrix<cplx>::InnerIterator it(diff, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
  return worst;
}

double OneBodyModel::boundary_leakage() const {
  const int n = grid_.points;
  double worst = 0.0;
  for (Eigen::Index k = 0; k < eigenvectors_.cols(); ++k) {
    const double peak = eigenvectors_.col(k).cwiseAbs().maxCoeff();
    double edge = 0.0;
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      const auto c = grid_.unflatten(i);
      bool boundary = false;
      for (int a = 0; a < grid_.dim; ++a) boundary = boundary || c[a] == 0 || c[a] == n - 1;
      if (boundary) edge = std::max(edge, std::abs(eigenvectors_(static_cast<Eigen::Index>(i), k)));
    }
    worst = std::max(worst, edge / peak);
  }
  return worst;
}

OneBodyModel build_one_body(const TrapConfig& trap, const GridSpec& spec) { return OneBodyModel(trap, spec); }

SpectralSplit spectral_split(const OneBodyModel& model, double cutoff) {
  SpectralSplit s;
  s.requested = cutoff;
  s.cutoff = cutoff;
  const auto& ev = model.eigenvalues();
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (std::abs(ev[k] - cutoff) <= 1e-12 * (1.0 + std::abs(cutoff))) {
      Eigen::Index next = k + 1;
      while (next < ev.size() && ev[next] - ev[k] <= 1e-12 * (1.0 + std::abs(ev[k]))) ++next;
      const double gap = next < ev.size() ? ev[next] - ev[k] : 1.0;
      s.cutoff = ev[k] + 0.5 * gap;
      s.adjusted = true;
      break;
    }
  }
  s.n_low = model.count_below(s.cutoff);
  s.empty = s.n_low == 0;
  const int m = model.modes();
  for (int k = 0; k < m; ++k) (k < s.n_low ? s.low : s.high).push_back(k);
  s.p_minus = Eigen::MatrixXd::Zero(m, m);
  for (int k : s.low) s.p_minus(k, k) = 1.0;
  s.p_plus = Eigen::MatrixXd::Identity(m, m) - s.p_minus;
  return s;
}

MatrixXc SpectralSplit::grid_projector(const OneBodyModel& model, bool low_part) const {
  if (low_part && n_low > model.modes())
    throw Error(ErrorCode::InvalidArgument, "low space exceeds the computed eigenvectors");
  const auto& idx = low_part ? low : high;
  MatrixXc phi(model.eigenvectors().rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t c = 0; c < idx.size(); ++c) phi.col(static_cast<Eigen::Index>(c)) = model.eigenvectors().col(idx[c]);
  return model.grid().cell_volume() * phi * phi.adjoint();
}

WeylReport verify_weyl_bound(const OneBodyModel& model, const std::vector<double>& cutoffs) {
  if (cutoffs.empty()) throw Error(ErrorCode::InvalidArgument, "empty cutoff list");
  WeylReport r;
  r.exponent = model.trap().weyl_exponent();
  const double lam0 = model.eigenvalues()[0];
  for (std::size_t i = 0; i < cutoffs.size(); ++i) {
    if (i && !(cutoffs[i] > cutoffs[i - 1])) throw Error(ErrorCode::InvalidArgument, "cutoffs must increase");
    if (!(cutoffs[i] > lam0)) throw Error(ErrorCode::InvalidArgument, "cutoffs must lie above the ground state");
    const auto split = spectral_split(model, cutoffs[i]);
    r.rows.push_back({split.cutoff, split.n_low, split.n_low / std::pow(split.cutoff, r.exponent)});
  }
  const std::size_t half = r.rows.size() / 2;
  double head = 0.0;
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    r.max_ratio = std::max(r.max_ratio, r.rows[i].ratio);
    if (i < std::max<std::size_t>(half, 1)) head = std::max(head, r.rows[i].ratio);
    else r.tail_max_ratio = std::max(r.tail_max_ratio, r.rows[i].ratio);
  }
  // the ratio must not grow along the sweep
  r.bounded = r.tail_max_ratio <= 1.1 * head;
  return r;
}

SobolevReport verify_sobolev_1d(const OneBodyModel& model, const InteractionPotential& w,
                                const std::vector<VectorXc>& samples, int coarse_points) {
  if (model.dim() != 1 || w.dimension() != 1) throw Error(ErrorCode::InvalidArgument, "Sobolev check is 1D only");
  SobolevReport rep;
  const Grid& g = model.grid();
  const double h = g.spacing();
  const int n = g.points;
  Eigen::VectorXd wv(n);
  for (int j = 0; j < n; ++j) wv[j] = std::abs(w(std::abs(g.coord(j))));
  const double wl1 = h * wv.sum();
  for (const auto& u : samples) {
    if (u.size() != n) throw Error(ErrorCode::InvalidArgument, "sample does not match the grid");
    const double lhs = h * wv.dot(u.cwiseAbs2());
    double du = std::norm(u[0]) + std::norm(u[n - 1]);
    for (int j = 0; j + 1 < n; ++j) du += std::norm(u[j + 1] - u[j]);
    const double dnorm = std::sqrt(du / h);
    const double unorm = std::sqrt(h * u.squaredNorm());
    const double den = wl1 * unorm * dnorm;
    const double ratio = (lhs == 0.0 || den == 0.0) ? 0.0 : lhs / den;
    rep.ratios.push_back(ratio);
    rep.worst_ratio = std::max(rep.worst_ratio, ratio);
  }

  // lowest eigenvalue of H1 x 1 + 1 x H1 + a W(x - y) on two coarse grids
  rep.amplitudes = {0.5, 1.0, 2.0, 4.0};
  const double extent = std::min(g.extent, 6.0);
  auto lowest = [&](int pts, double amp) {
    const Grid cg{1, pts, extent};
    const double ch = cg.spacing();
    Eigen::VectorXd v(pts);
    for (int j = 0; j < pts; ++j) {
      const auto& t = model.trap();
      v[j] = t.kind == TrapKind::Tabulated ? 0.0 : t.potential({cg.coord(j), 0, 0});
    }
    Eigen::MatrixXd wxy(pts, pts);
    for (int a = 0; a < pts; ++a)
      for (int b = 0; b < pts; ++b) wxy(a, b) = amp * w(std::abs(cg.coord(a) - cg.coord(b)));
    auto op = [&](const Eigen::VectorXd& in, Eigen::VectorXd& out) {
      out.resize(in.size());
      const double ih2 = 1.0 / (ch * ch);
      for (int b = 0; b < pts; ++b)
        for (int a = 0; a < pts; ++a) {
          const int i = b * pts + a;
          double s = 4.0 * in[i];
          if (a > 0) s -= in[i - 1];
          if (a + 1 < pts) s -= in[i + 1];
          if (b > 0) s -= in[i - pts];
          if (b + 1 < pts) s -= in[i + pts];
          out[i] = s * ih2 + (v[a] + v[b] + wxy(a, b)) * in[i];
        }
    };
    LanczosOptions lo;
    lo.tolerance = 1e-10;
    return lanczos_lowest<double>(op, static_cast<Eigen::Index>(pts) * pts, lo).value;
  };
  auto fit = [&](int pts, std::vector<double>& store) {
    double c = -std::numeric_limits<double>::infinity();
    for (double amp : rep.amplitudes) {
      const double e = lowest(pts, amp);
      store.push_back(e);
      const double wm = amp * w.negative_integral();
      c = std::max(c, -e / (wm * wm + 1.0));
    }
    return c;
  };
  if (!w.is_zero()) {
    rep.fitted_c_coarse = fit(coarse_points, rep.lowest_coarse);
    rep.fitted_c_fine = fit(2 * coarse_points, rep.lowest_fine);
  }
  rep.pass = rep.worst_ratio <= 1.0 + 1e-12 &&
             std::abs(rep.fitted_c_coarse - rep.fitted_c_fine) <= 0.05 * (1.0 + std::abs(rep.fitted_c_fine));
  return rep;
}

}  // namespace mflab
