#include "mflab/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "mflab/radial.hpp"

namespace mflab {

namespace {

constexpr double kPi = std::numbers::pi;

class Preconditioner {
 public:
  // (H1 - lambda0 + 1)^{-1}
  explicit Preconditioner(const OneBodyModel& m) : model_(m) {
    shift_ = 1.0 - m.eigenvalues()[0];
    if (m.dim() == 1) {
      const double h = m.grid().spacing();
      diag_ = m.potential_values().array() + 2.0 / (h * h) + shift_;
      off_ = -1.0 / (h * h);
      const Eigen::Index n = diag_.size();
      c_.resize(n);
      den_.resize(n);
      den_[0] = diag_[0];
      c_[0] = off_ / den_[0];
      for (Eigen::Index i = 1; i < n; ++i) {
        den_[i] = diag_[i] - off_ * c_[i - 1];
        c_[i] = off_ / den_[i];
      }
    }
  }

  VectorXc operator()(const VectorXc& g) const {
    if (model_.dim() == 1) return thomas_(g);
    // a few conjugate-gradient steps on (H1 + shift) x = g
    VectorXc x = VectorXc::Zero(g.size()), r = g, p = r;
    double rr = r.squaredNorm();
    const double stop = 1e-6 * rr;
    for (int it = 0; it < 30 && rr > stop; ++it) {
      const VectorXc ap = model_.apply(p) + shift_ * p;
      const double alpha = rr / std::real(p.dot(ap));
      x += alpha * p;
      r -= alpha * ap;
      const double rr2 = r.squaredNorm();
      p = r + (rr2 / rr) * p;
      rr = rr2;
    }
    return x;
  }

 private:
  VectorXc thomas_(const VectorXc& b) const {
    const Eigen::Index n = b.size();
    VectorXc d(n), x(n);
    d[0] = b[0] / den_[0];
    for (Eigen::Index i = 1; i < n; ++i) d[i] = (b[i] - off_ * d[i - 1]) / den_[i];
    x[n - 1] = d[n - 1];
    for (Eigen::Index i = n - 2; i >= 0; --i) x[i] = d[i] - c_[i] * x[i + 1];
    return x;
  }

  const OneBodyModel& model_;
  double shift_ = 0.0;
  Eigen::VectorXd diag_, c_, den_;
  double off_ = 0.0;
};

struct FlowResult {
  VectorXc u;
  double energy;
  double gradient_norm;
  int iterations;
  MinimizeStatus status;
  std::vector<double> trace;
};

FlowResult gradient_flow(const MeanFieldProblem& p, Functional which, VectorXc u, double tol, int max_iter,
                         const Preconditioner& pre, bool keep_trace) {
  const double vol = p.grid().cell_volume();
  u /= std::sqrt(vol * u.squaredNorm());
  double e = p.energy(u, which);
  FlowResult out{u, e, 0.0, 0, MinimizeStatus::MaxIterations, {}};
  if (keep_trace) out.trace.push_back(e);
  double tau = 1.0;
  for (int it = 0; it < max_iter; ++it) {
    out.iterations = it;
    const VectorXc hu = p.effective(u, which);
    const double mu = vol * std::real(u.dot(hu));
    const VectorXc g = hu - mu * u;
    const double gn = std::sqrt(vol * g.squaredNorm());
    out.gradient_norm = gn;
    if (gn < tol) {
      out.status = MinimizeStatus::Converged;
      break;
    }
    VectorXc d = -pre(g);
    d -= u * (vol * u.dot(d));
    const double slope = 2.0 * vol * std::real(g.dot(d));
    if (!(slope < 0.0)) {
      out.status = MinimizeStatus::NoDescent;
      break;
    }
    bool accepted = false;
    while (tau > 1e-14) {
      VectorXc trial = u + tau * d;
      trial /= std::sqrt(vol * trial.squaredNorm());
      const double et = p.energy(trial, which);
      if (et <= e + 1e-4 * tau * slope || (et <= e + 1e-15 * std::max(1.0, std::abs(e)) && tau * std::abs(slope) < 1e-12)) {
        u = std::move(trial);
        e = std::min(et, e);
        tau = std::min(2.0 * tau, 4.0);
        accepted = true;
        break;
      }
      tau *= 0.5;
    }
    if (keep_trace) out.trace.push_back(e);
    if (!accepted) {
      out.status = MinimizeStatus::NoDescent;
      break;
    }
  }
  if (out.status == MinimizeStatus::MaxIterations) out.iterations = max_iter;
  out.u = u;
  out.energy = p.energy(u, which);
  return out;
}

double fourier_at(const InteractionPotential& w, double k) {
  if (const auto& g = w.gaussian_terms()) {
    double v = 0.0;
    for (const auto& t : *g)
      v += t.amplitude * std::pow(2.0 * kPi * t.width * t.width, w.dimension() / 2.0) *
           std::exp(-0.5 * k * k * t.width * t.width);
    return v;
  }
  return radial::fourier(w.dimension(), w.radial(), k, w.range());
}

}  // namespace

const char* to_string(Functional f) {
  switch (f) {
    case Functional::Hartree: return "H";
    case Functional::HartreeEps: return "Heps";
    case Functional::NLS: return "NLS";
  }
  return "?";
}

const char* to_string(MinimizeStatus s) {
  switch (s) {
    case MinimizeStatus::Converged: return "CONVERGED";
    case MinimizeStatus::NoDescent: return "NO_DESCENT";
    case MinimizeStatus::MaxIterations: return "MAX_ITERATIONS";
  }
  return "?";
}

MeanFieldProblem MeanFieldProblem::scaled(const OneBodyModel& model, const InteractionPotential& w, double n,
                                          double beta, double epsilon) {
  if (w.dimension() != model.dim()) throw Error(ErrorCode::InvalidArgument, "potential and trap dimensions differ");
  if (epsilon < 0.0 || epsilon > 1.0) throw Error(ErrorCode::InvalidArgument, "epsilon must lie in [0, 1]");
  MeanFieldProblem p;
  p.model_ = &model;
  p.wn_ = w.scaled(n, beta);
  p.n_ = n;
  p.beta_ = beta;
  p.epsilon_ = epsilon;
  p.a_ = w.integral();
  const double h = model.grid().spacing();
  if (!w.is_zero() && p.wn_->width() < 2.0 * h)
    throw Error(ErrorCode::Resolution, "w_N width " + std::to_string(p.wn_->width()) +
                                           " is narrower than 4 grid cells (h = " + std::to_string(h) + ")");
  p.conv_ = std::make_shared<PairConvolver>(model.grid(), *p.wn_);
  if (epsilon > 0.0) p.conv_abs_ = std::make_shared<PairConvolver>(model.grid(), p.wn_->absolute());
  return p;
}

MeanFieldProblem MeanFieldProblem::contact(const OneBodyModel& model, double a) {
  MeanFieldProblem p;
  p.model_ = &model;
  p.a_ = a;
  return p;
}

const InteractionPotential& MeanFieldProblem::scaled_potential() const {
  if (!wn_) throw Error(ErrorCode::InvalidArgument, "contact problem has no pair potential");
  return *wn_;
}

Eigen::VectorXd MeanFieldProblem::interaction_field_(const Eigen::VectorXd& rho, Functional which) const {
  switch (which) {
    case Functional::NLS: return a_ * rho;
    case Functional::Hartree:
    case Functional::HartreeEps: {
      if (!conv_) throw Error(ErrorCode::InvalidArgument, "Hartree functionals need a pair potential");
      Eigen::VectorXd f = conv_->apply(rho);
      if (which == Functional::HartreeEps && conv_abs_) f -= epsilon_ * conv_abs_->apply(rho);
      return f;
    }
  }
  return rho;
}

std::pair<double, double> MeanFieldProblem::energy_parts(const VectorXc& u, Functional which) const {
  if (static_cast<std::size_t>(u.size()) != grid().size())
    throw Error(ErrorCode::InvalidArgument, "state does not live on the problem grid");
  const double vol = grid().cell_volume();
  const double quad = vol * std::real(u.dot(model_->apply(u)));
  const Eigen::VectorXd rho = u.cwiseAbs2();
  const double inter = 0.5 * vol * rho.dot(interaction_field_(rho, which));
  return {quad, inter};
}

double MeanFieldProblem::energy(const VectorXc& u, Functional which) const {
  const auto [q, i] = energy_parts(u, which);
  return q + i;
}

VectorXc MeanFieldProblem::effective(const VectorXc& u, Functional which) const {
  const Eigen::VectorXd rho = u.cwiseAbs2();
  return model_->apply(u) + interaction_field_(rho, which).cast<cplx>().cwiseProduct(u);
}

std::vector<VectorXc> random_mode_samples(const OneBodyModel& model, int count, int modes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  const int m = std::min(modes, model.modes());
  const double vol = model.grid().cell_volume();
  std::vector<VectorXc> out;
  for (int s = 0; s < count; ++s) {
    VectorXc u = VectorXc::Zero(model.eigenvectors().rows());
    for (int k = 0; k < m; ++k) {
      const cplx c = model.is_complex() ? cplx(g(rng), g(rng)) : cplx(g(rng), 0.0);
      u += c * model.eigenvectors().col(k);
    }
    u /= std::sqrt(vol * u.squaredNorm());
    out.push_back(std::move(u));
  }
  return out;
}

MinimizationResult minimize(const MeanFieldProblem& problem, Functional which, const MinimizeOptions& opt) {
  const int d = problem.grid().dim;
  if (which == Functional::NLS) {
    const double a = problem.coupling();
    if (d == 2 && a <= -townes_reference().mass)
      throw Error(ErrorCode::Unstable, "NLS energy is unbounded below for a <= -a* in 2D");
    if (d == 3 && a < 0.0) throw Error(ErrorCode::Unstable, "NLS energy is unbounded below for a < 0 in 3D");
  } else if (!problem.has_potential()) {
    throw Error(ErrorCode::InvalidArgument, "Hartree functionals need a pair potential");
  }
  const double tol = opt.tolerance > 0 ? opt.tolerance : (d == 1 ? 1e-8 : 1e-6);
  const Preconditioner pre(problem.model());

  std::vector<VectorXc> starts;
  starts.push_back(problem.model().eigenvectors().col(0));
  for (auto& u : random_mode_samples(problem.model(), opt.starts, 6, opt.seed)) starts.push_back(std::move(u));

  MinimizationResult best;
  double emin = std::numeric_limits<double>::infinity(), emax = -emin;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    FlowResult fr = gradient_flow(problem, which, starts[s], tol, opt.max_iterations, pre, opt.keep_trace);
    best.start_energies.push_back(fr.energy);
    emin = std::min(emin, fr.energy);
    emax = std::max(emax, fr.energy);
    if (s == 0 || fr.energy < best.energy) {
      best.u = std::move(fr.u);
      best.energy = fr.energy;
      best.gradient_norm = fr.gradient_norm;
      best.iterations = fr.iterations;
      best.status = fr.status;
      best.best_start = static_cast<int>(s);
      best.trace = std::move(fr.trace);
    }
  }
  best.dispersion = emax - emin;
  best.constraint_residual = std::abs(problem.grid().cell_volume() * best.u.squaredNorm() - 1.0);
  return best;
}

nlohmann::json to_json(const MinimizationResult& r, const MeanFieldProblem& p, Functional which) {
  return {{"which", to_string(which)},
          {"N", p.n()},
          {"beta", p.beta()},
          {"epsilon", p.epsilon()},
          {"energy", r.energy},
          {"iterations", r.iterations},
          {"dispersion", r.dispersion},
          {"gradient_norm", r.gradient_norm},
          {"constraint_residual", r.constraint_residual},
          {"status", to_string(r.status)}};
}

GapReport hartree_nls_gap(const OneBodyModel& model, const InteractionPotential& w, const std::vector<double>& ns,
                          double beta, const MinimizeOptions& opt) {
  GapReport rep;
  rep.beta = beta;
  const auto nls_problem = MeanFieldProblem::contact(model, w.integral());
  const auto nls = minimize(nls_problem, Functional::NLS, opt);
  std::vector<double> gaps;
  for (double n : ns) {
    const auto p = MeanFieldProblem::scaled(model, w, n, beta);
    const auto h = minimize(p, Functional::Hartree, opt);
    GapRow row{n, h.energy, nls.energy, std::abs(h.energy - nls.energy), 0.0};
    // sandwich: e_H - e_NLS <= E_H[u*] - E_NLS[u*], e_NLS - e_H <= E_NLS[u_H] - E_H[u_H]
    const double at_nls = std::abs(p.energy(nls.u, Functional::Hartree) - nls.energy);
    const double at_h = std::abs(nls_problem.energy(h.u, Functional::NLS) - h.energy);
    row.functional_gap = std::max(at_nls, at_h);
    rep.functional_constant = std::max(rep.functional_constant, row.functional_gap * std::pow(n, beta));
    rep.rows.push_back(row);
    gaps.push_back(row.gap);
  }
  rep.fit = fit_rate(ns, gaps);
  rep.slope_ok = rep.fit.exact_zero || rep.fit.slope <= -beta + 0.15;
  for (const auto& r : rep.rows)
    if (r.gap > rep.functional_constant * std::pow(r.n, -beta) + 1e-10) rep.bound_ok = false;
  return rep;
}

double modulus_gradient_norm2(const Grid& g, const VectorXc& u) {
  const int n = g.points;
  const double h = g.spacing();
  const Eigen::VectorXd a = u.cwiseAbs();
  double s = 0.0;
  if (g.dim == 1) {
    s += a[0] * a[0] + a[n - 1] * a[n - 1];
    for (int j = 0; j + 1 < n; ++j) s += (a[j + 1] - a[j]) * (a[j + 1] - a[j]);
  } else {
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * n + x;
        const double rx = x + 1 < n ? a[i + 1] : 0.0;
        const double ry = y + 1 < n ? a[i + n] : 0.0;
        s += (rx - a[i]) * (rx - a[i]) + (ry - a[i]) * (ry - a[i]);
        if (x == 0) s += a[i] * a[i];
        if (y == 0) s += a[i] * a[i];
      }
  }
  return g.cell_volume() * s / (h * h);
}

CoercivityReport kinetic_coercivity_check(const MeanFieldProblem& problem, const std::vector<VectorXc>& samples,
                                          double eta) {
  CoercivityReport rep;
  rep.c0 = problem.model().trap().sup_negative_part();
  const bool nonneg = !problem.has_potential() || problem.scaled_potential().nonnegative();
  rep.bound = nonneg ? 1.0 : (eta > 0 ? (1.0 + eta) / eta : std::numeric_limits<double>::infinity());
  const double vol = problem.grid().cell_volume();
  for (const auto& s : samples) {
    VectorXc u = s / std::sqrt(vol * s.squaredNorm());
    const double e = problem.has_potential() ? problem.energy(u, Functional::Hartree)
                                             : problem.energy(u, Functional::NLS);
    const double den = e + rep.c0;
    const double ratio = den > 0 ? modulus_gradient_norm2(problem.grid(), u) / den
                                 : std::numeric_limits<double>::infinity();
    if (!std::isfinite(ratio)) rep.finite = false;
    rep.ratios.push_back(ratio);
    rep.worst = std::max(rep.worst, ratio);
  }
  return rep;
}

ProbeResult instability_probe(const TrapConfig& trap, const InteractionPotential& w, double beta,
                              const std::vector<double>& ns, const ProbeOptions& opt) {
  const int d = w.dimension();
  if (ns.empty()) throw Error(ErrorCode::InvalidArgument, "empty N list");
  if (trap.omega != 0.0) throw Error(ErrorCode::InvalidArgument, "instability probe uses A = 0");
  const double rho0 = opt.radius;
  auto profile = [rho0](double r) {
    if (r >= rho0) return 0.0;
    const double t = 1.0 - (r / rho0) * (r / rho0);
    return t * t;
  };
  auto vpot = [&](double r) {
    if (trap.kind == TrapKind::Box || trap.kind == TrapKind::Tabulated) return 0.0;
    return trap.coefficient * std::pow(r, trap.exponent);
  };
  ProbeResult res;
  std::vector<double> energies;
  if (d == 3) {
    const double mass = radial::integral(3, [&](double r) { return profile(r) * profile(r); }, rho0);
    const double c2 = 1.0 / mass;
    res.kinetic = c2 * radial::integral(3, [&](double r) {
      if (r >= rho0) return 0.0;
      const double dp = 2.0 * (1.0 - (r / rho0) * (r / rho0)) * (-2.0 * r / (rho0 * rho0));
      return dp * dp;
    }, rho0);
    auto rho = [&](double r) { return c2 * profile(r) * profile(r); };
    const double kmax = std::min(40.0 / rho0, 12.0 / w.width());
    const int nk = 2000;
    double sum = 0.0;
    for (int i = 0; i <= nk; ++i) {
      const double k = kmax * i / nk;
      const double rh = radial::fourier(3, rho, k, rho0, 2000);
      sum += radial::simpson_weight(i, nk, kmax / nk) * fourier_at(w, k) * rh * rh * 4.0 * kPi * k * k;
    }
    res.interaction = sum / std::pow(2.0 * kPi, 3);
    for (double n : ns) {
      const double s = std::pow(n, beta);
      const double vt = c2 * radial::integral(3, [&](double r) { return vpot(r / s) * profile(r) * profile(r); }, rho0);
      const double e = s * s * res.kinetic + 0.5 * s * s * s * res.interaction + vt;
      energies.push_back(e);
      res.rows.push_back({n, e, e / (s * s)});
    }
  } else {
    const Grid base{d, opt.points, rho0 * 1.02};
    if (!w.is_zero() && w.width() < 2.0 * base.spacing())
      throw Error(ErrorCode::Resolution, "probe grid does not resolve the potential");
    VectorXc u(base.size());
    for (std::size_t i = 0; i < base.size(); ++i) u[static_cast<Eigen::Index>(i)] = profile(base.radius(i));
    u /= std::sqrt(base.cell_volume() * u.squaredNorm());
    res.kinetic = modulus_gradient_norm2(base, u);
    res.interaction = PairConvolver(base, w).pair_energy(u.cwiseAbs2());
    for (double n : ns) {
      const double s = std::pow(n, beta);
      const Grid g{d, opt.points, base.extent / s};
      const VectorXc v = std::pow(s, d / 2.0) * u;
      const Eigen::VectorXd rho = v.cwiseAbs2();
      double vt = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) vt += vpot(g.radius(i)) * rho[static_cast<Eigen::Index>(i)];
      vt *= g.cell_volume();
      const double e = modulus_gradient_norm2(g, v) + vt + 0.5 * PairConvolver(g, w.scaled(n, beta)).pair_energy(rho);
      energies.push_back(e);
      res.rows.push_back({n, e, e / (s * s)});
    }
  }
  if (d == 2 && ns.size() >= 2 && trap.kind != TrapKind::Box) {
    std::vector<double> x, y;
    for (const auto& r : res.rows) {
      x.push_back(std::pow(r.n, -(2.0 + trap.exponent) * beta));
      y.push_back(r.scaled);
    }
    res.limit = linear_fit(x, y).first;
  } else {
    res.limit = res.rows.back().scaled;
  }
  bool decreasing = ns.size() >= 2;
  for (std::size_t i = 1; i < energies.size(); ++i) decreasing = decreasing && energies[i] < energies[i - 1];
  res.diverges = decreasing && energies.back() < 0.0;
  const double floor = -trap.sup_negative_part() - 1e-12;
  for (double e : energies) res.bounded_below = res.bounded_below && e >= floor;
  return res;
}

}  // namespace mflab
