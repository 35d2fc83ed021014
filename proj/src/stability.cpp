#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <tuple>

#include "mflab/convolution.hpp"
#include "mflab/interaction.hpp"
#include "mflab/radial.hpp"

namespace mflab {

namespace {

constexpr double kPi = std::numbers::pi;

// Euclidean projection onto {x >= 0, sum x = 1}.
void project_simplex(Eigen::VectorXd& v) {
  std::vector<double> s(v.data(), v.data() + v.size());
  std::sort(s.begin(), s.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    cum += s[i];
    const double t = (cum - 1.0) / static_cast<double>(i + 1);
    if (s[i] - t > 0.0) theta = t;
  }
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = std::max(0.0, v[i] - theta);
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

struct ClassicalRun {
  double value;
  Eigen::VectorXd rho;
};

ClassicalRun descend_simplex(const PairConvolver& conv, Eigen::VectorXd rho, double sup, int max_iter) {
  const double vol = conv.grid().cell_volume();
  auto kmul = [&](const Eigen::VectorXd& x) { Eigen::VectorXd y = conv.apply(x); y /= vol; return y; };
  Eigen::VectorXd k = kmul(rho);
  double q = rho.dot(k);
  double tau = 1.0 / (2.0 * std::max(sup, 1e-300));
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd g = 2.0 * k;
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt) {
      Eigen::VectorXd trial = rho - tau * g;
      project_simplex(trial);
      const Eigen::VectorXd diff = trial - rho;
      const double step2 = diff.squaredNorm();
      if (diff.lpNorm<Eigen::Infinity>() < 1e-15) break;
      const Eigen::VectorXd kt = kmul(trial);
      const double qt = trial.dot(kt);
      if (qt <= q + g.dot(diff) + step2 / (2.0 * tau) + 1e-16 * std::abs(q)) {
        moved = qt < q;
        rho = trial;
        k = kt;
        q = qt;
        tau *= 2.0;
        break;
      }
      tau *= 0.5;
    }
    if (!moved) break;
  }
  return {q, rho};
}

}  // namespace

double fourier_minimum(const InteractionPotential& w, double kmax, int samples) {
  if (w.is_zero()) return 0.0;
  double m = fourier_at(w, 0.0);
  for (int i = 1; i <= samples; ++i) m = std::min(m, fourier_at(w, kmax * i / samples));
  return m;
}

ClassicalStabilityResult check_classical_stability(const InteractionPotential& w,
                                                   const ClassicalStabilityOptions& opt) {
  if (opt.points < 2 || !(opt.extent > 0.0) || opt.starts < 1)
    throw Error(ErrorCode::InvalidArgument, "classical stability needs points >= 2, extent > 0, starts >= 1");
  ClassicalStabilityResult res;
  res.grid = Grid{w.dimension(), opt.points, opt.extent};
  const double h = res.grid.spacing();
  if (!w.is_zero() && h > w.width() / 4.0)
    throw Error(ErrorCode::Resolution, "grid spacing " + std::to_string(h) + " does not resolve potential width " +
                                           std::to_string(w.width()) + " (need 8 points across)");
  res.fourier_minimum = fourier_minimum(w, 12.0 / w.width());
  res.fourier_certified = res.fourier_minimum >= -1e-12 * std::max(w.abs_integral(), 1e-300);
  const std::size_t size = res.grid.size();
  if (w.is_zero()) {
    res.verdict = Verdict::Stable;
    res.witness.assign(size, 1.0 / size);
    return res;
  }

  PairConvolver conv(res.grid, w);
  std::mt19937_64 rng(opt.seed);
  std::exponential_distribution<double> expo(1.0);
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_rho;
  for (int s = 0; s < opt.starts; ++s) {
    Eigen::VectorXd rho(size);
    if (s == 0) {
      rho.setConstant(1.0 / size);
    } else if (s == 1) {
      rho.setZero();
      std::size_t center = 0, stride = 1;
      for (int a = 0; a < res.grid.dim; ++a) {
        center += stride * (opt.points / 2);
        stride *= opt.points;
      }
      rho[center] = 1.0;
    } else {
      for (auto& x : rho) x = expo(rng);
      rho /= rho.sum();
    }
    auto run = descend_simplex(conv, rho, w.sup_abs(), opt.max_iterations);
    res.start_values.push_back(run.value);
    if (run.value < best) {
      best = run.value;
      best_rho = run.rho;
    }
    if (best < -1e-10) break;
  }
  res.best_value = best;
  res.witness.assign(best_rho.data(), best_rho.data() + best_rho.size());
  if (best < -1e-10) res.verdict = Verdict::Unstable;
  else res.verdict = res.fourier_certified ? Verdict::Stable : Verdict::StableUpToSearch;
  return res;
}

// ---------------------------------------------------------------------------
// Hartree ratio in 2D
// ---------------------------------------------------------------------------

namespace {

// Transform data of a radial profile p: mass m0, gradient g0 and the
// Hankel transform of p^2 tabulated on [0, kmax].
struct ProfileTransform {
  double m0 = 0.0, g0 = 0.0, kmax = 0.0, dk = 0.0;
  std::vector<double> rho_hat;

  double at(double k) const {
    if (k >= kmax) return 0.0;
    const double x = k / dk;
    const std::size_t i = static_cast<std::size_t>(x);
    if (i + 1 >= rho_hat.size()) return rho_hat.back();
    const double f = x - static_cast<double>(i);
    return (1.0 - f) * rho_hat[i] + f * rho_hat[i + 1];
  }
};

ProfileTransform make_transform(const std::function<double(double)>& p, double range) {
  ProfileTransform t;
  const double dr = range * 1e-4;
  t.m0 = radial::integral(2, [&](double r) { return p(r) * p(r); }, range);
  t.g0 = radial::integral(2, [&](double r) {
    const double d = (p(r + dr) - p(std::max(0.0, r - dr))) / (r + dr - std::max(0.0, r - dr));
    return d * d;
  }, range);
  t.kmax = 40.0;
  const int nk = 1600;
  t.dk = t.kmax / nk;
  t.rho_hat.resize(nk + 1);
  auto rho = [&](double r) { return p(r) * p(r); };
  for (int i = 0; i <= nk; ++i) t.rho_hat[i] = radial::fourier(2, rho, i * t.dk, range, 2000);
  return t;
}

class WHat {
 public:
  explicit WHat(const InteractionPotential& w) : w_(w) {
    if (w.gaussian_terms() || w.is_zero()) return;
    kmax_ = 12.0 / w.width();
    const int nk = 1000;
    dk_ = kmax_ / nk;
    table_.resize(nk + 1);
    for (int i = 0; i <= nk; ++i) table_[i] = fourier_at(w, i * dk_);
  }
  double kmax() const { return table_.empty() ? 12.0 / w_.width() : kmax_; }
  double operator()(double k) const {
    if (table_.empty()) return w_.is_zero() ? 0.0 : fourier_at(w_, k);
    if (k >= kmax_) return 0.0;
    const double x = k / dk_;
    const std::size_t i = static_cast<std::size_t>(x);
    if (i + 1 >= table_.size()) return table_.back();
    const double f = x - static_cast<double>(i);
    return (1.0 - f) * table_[i] + f * table_[i + 1];
  }

 private:
  const InteractionPotential& w_;
  double kmax_ = 0.0, dk_ = 0.0;
  std::vector<double> table_;
};

// D / (2 |u|^2 |grad u|^2) for u = p(|x| / length), by Parseval.
double ratio_from_transform(const WHat& what, const ProfileTransform& t, double length) {
  const double kcut = std::min(what.kmax(), t.kmax / length);
  const int n = 2000;
  const double dk = kcut / n;
  double sum = 0.0;
  const double l4 = length * length * length * length;
  for (int i = 0; i <= n; ++i) {
    const double k = i * dk;
    const double rh = t.at(length * k);
    sum += radial::simpson_weight(i, n, dk) * what(k) * l4 * rh * rh * k;
  }
  const double d = sum / (2.0 * kPi);
  return d / (2.0 * length * length * t.m0 * t.g0);
}

const ProfileTransform& townes_transform(const TownesProfile& q) {
  static std::mutex mu;
  static std::map<std::tuple<double, double, double>, ProfileTransform> cache;
  std::lock_guard<std::mutex> lock(mu);
  const auto key = std::make_tuple(q.q0, q.step, q.mass);
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, make_transform([&q](double r) { return q(r); }, q.trusted_radius)).first;
  return it->second;
}

// Gaussian family u = exp(-|x|^2 / (2 l^2)): ratio = int w(z) exp(-|z|^2/(2 l^2)) dz / (4 pi).
double gaussian_family_ratio(const InteractionPotential& w, double l) {
  if (w.is_zero()) return 0.0;
  if (const auto& g = w.gaussian_terms()) {
    double v = 0.0;
    for (const auto& t : *g) v += t.amplitude * 2.0 * kPi / (1.0 / (t.width * t.width) + 1.0 / (l * l));
    return v / (4.0 * kPi);
  }
  return radial::integral(2, [&](double r) { return w(r) * std::exp(-r * r / (2.0 * l * l)); }, w.range(), 4000) /
         (4.0 * kPi);
}

template <class F>
std::pair<double, double> scan_lengths(F ratio, double lo, double hi) {
  const int n = 96;
  double best = std::numeric_limits<double>::infinity(), best_l = lo;
  int best_i = 0;
  for (int i = 0; i <= n; ++i) {
    const double l = lo * std::pow(hi / lo, static_cast<double>(i) / n);
    const double r = ratio(l);
    if (r < best) {
      best = r;
      best_l = l;
      best_i = i;
    }
  }
  // golden section on log(length) around the best sample
  double a = std::log(lo) + (std::max(0, best_i - 1)) * std::log(hi / lo) / n;
  double b = std::log(lo) + (std::min(n, best_i + 1)) * std::log(hi / lo) / n;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = ratio(std::exp(c)), fd = ratio(std::exp(d));
  for (int it = 0; it < 40; ++it) {
    if (fc < fd) {
      b = d; d = c; fd = fc;
      c = b - gr * (b - a); fc = ratio(std::exp(c));
    } else {
      a = c; c = d; fc = fd;
      d = a + gr * (b - a); fd = ratio(std::exp(d));
    }
  }
  if (std::min(fc, fd) < best) {
    best = std::min(fc, fd);
    best_l = std::exp(fc < fd ? c : d);
  }
  return {best, best_l};
}

// Dirichlet Laplacian diagonalized by the discrete sine basis along each axis.
class SineSolver2D {
 public:
  explicit SineSolver2D(const Grid& g) : n_(g.points) {
    const double h = g.spacing();
    s_.resize(n_, n_);
    lam_.resize(n_);
    for (int k = 0; k < n_; ++k) {
      lam_[k] = (2.0 - 2.0 * std::cos(kPi * (k + 1) / (n_ + 1))) / (h * h);
      for (int j = 0; j < n_; ++j) s_(j, k) = std::sqrt(2.0 / (n_ + 1)) * std::sin(kPi * (j + 1) * (k + 1) / (n_ + 1));
    }
  }
  // (-Laplacian + shift)^{-1} f
  Eigen::VectorXd solve(const Eigen::VectorXd& f, double shift) const {
    Eigen::Map<const Eigen::MatrixXd> fm(f.data(), n_, n_);
    Eigen::MatrixXd c = s_.transpose() * fm * s_;
    for (int j = 0; j < n_; ++j)
      for (int i = 0; i < n_; ++i) c(i, j) /= lam_[i] + lam_[j] + shift;
    Eigen::MatrixXd u = s_ * c * s_.transpose();
    return Eigen::Map<Eigen::VectorXd>(u.data(), u.size());
  }

 private:
  int n_;
  Eigen::MatrixXd s_;
  Eigen::VectorXd lam_;
};

// h^2 * (-Laplacian_h u), 5-point stencil with zero walls
Eigen::VectorXd neg_laplacian(const Grid& g, const Eigen::VectorXd& u) {
  const int n = g.points;
  const double h = g.spacing();
  Eigen::VectorXd out(u.size());
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * n + x;
      double s = 4.0 * u[i];
      if (x > 0) s -= u[i - 1];
      if (x + 1 < n) s -= u[i + 1];
      if (y > 0) s -= u[i - n];
      if (y + 1 < n) s -= u[i + n];
      out[i] = s / (h * h);
    }
  return out;
}

struct GridRatio {
  double value, d, s, t;
  Eigen::VectorXd lap;
  Eigen::VectorXd conv;
};

GridRatio grid_ratio(const PairConvolver& conv, const Eigen::VectorXd& u) {
  const Grid& g = conv.grid();
  const double vol = g.cell_volume();
  GridRatio r;
  const Eigen::VectorXd rho = u.cwiseProduct(u);
  r.conv = conv.apply(rho);
  r.d = vol * rho.dot(r.conv);
  r.s = vol * u.squaredNorm();
  r.lap = neg_laplacian(g, u);
  r.t = vol * u.dot(r.lap);
  r.value = r.d / (2.0 * r.s * r.t);
  return r;
}

double refine_on_grid(const InteractionPotential& w, const Grid& g, Eigen::VectorXd u, int iterations) {
  PairConvolver conv(g, w);
  SineSolver2D pre(g);
  const double vol = g.cell_volume();
  const double shift = 16.0 / (g.extent * g.extent);
  u /= std::sqrt(vol * u.squaredNorm());
  GridRatio cur = grid_ratio(conv, u);
  double alpha = 1.0;
  for (int it = 0; it < iterations; ++it) {
    // gradient of D/(2 S T) with respect to the nodal values
    const Eigen::VectorXd gd = 4.0 * vol * u.cwiseProduct(cur.conv);
    const Eigen::VectorXd gs = 2.0 * vol * u;
    const Eigen::VectorXd gt = 2.0 * vol * cur.lap;
    const Eigen::VectorXd grad = gd / (2.0 * cur.s * cur.t) - cur.value * (gs / cur.s + gt / cur.t);
    Eigen::VectorXd dir = -pre.solve(grad / vol, shift);
    const double slope = grad.dot(dir);
    if (!(slope < 0.0)) break;
    // scale the first trial step to a relative change of ~10%
    const double base = 0.1 * std::sqrt(u.squaredNorm() / std::max(dir.squaredNorm(), 1e-300));
    bool accepted = false;
    for (int bt = 0; bt < 30; ++bt) {
      const double step = alpha * base;
      Eigen::VectorXd trial = u + step * dir;
      trial /= std::sqrt(vol * trial.squaredNorm());
      GridRatio tr = grid_ratio(conv, trial);
      if (tr.value <= cur.value + 1e-4 * step * slope) {
        u = trial;
        cur = std::move(tr);
        alpha = std::min(alpha * 2.0, 8.0);
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
  }
  return cur.value;
}

}  // namespace

double hartree_ratio_radial(const InteractionPotential& w, const std::function<double(double)>& profile,
                            double profile_range, double length) {
  if (w.dimension() != 2) throw Error(ErrorCode::InvalidArgument, "Hartree ratio is defined for d = 2");
  const WHat what(w);
  return ratio_from_transform(what, make_transform(profile, profile_range), length);
}

HartreeStabilityResult check_hartree_stability_2d(const InteractionPotential& w, const HartreeStabilityOptions& opt,
                                                  const TownesProfile& townes) {
  if (w.dimension() != 2) throw Error(ErrorCode::InvalidArgument, "Hartree stability check requires d = 2");
  HartreeStabilityResult res;
  res.analytic_lower_bound = townes.mass > 0 ? -w.negative_integral() / townes.mass : 0.0;
  if (w.is_zero()) {
    res.verdict = Verdict::Stable;
    return res;
  }
  const double lo = 0.02 * w.width(), hi = 500.0 * w.width();
  std::tie(res.gaussian_ratio, res.gaussian_length) =
      scan_lengths([&](double l) { return gaussian_family_ratio(w, l); }, lo, hi);
  const WHat what(w);
  const ProfileTransform& tq = townes_transform(townes);
  std::tie(res.townes_ratio, res.townes_length) =
      scan_lengths([&](double l) { return ratio_from_transform(what, tq, l); }, lo, hi);
  res.ratio = std::min(res.gaussian_ratio, res.townes_ratio);
  res.refined_ratio = res.ratio;

  if (opt.refine_iterations > 0 && opt.points >= 8) {
    const bool use_townes = res.townes_ratio < res.gaussian_ratio;
    const double l = use_townes ? res.townes_length : res.gaussian_length;
    double extent = opt.extent > 0 ? opt.extent : (use_townes ? 8.0 : 5.0) * l;
    extent = std::min(extent, (opt.points + 1) * w.width() / 8.0);
    const Grid g{2, opt.points, extent};
    Eigen::VectorXd u0(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double r = g.radius(i);
      u0[i] = use_townes ? townes(r / l) : std::exp(-r * r / (2.0 * l * l));
    }
    if (u0.norm() == 0.0) u0.setOnes();
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double best = std::numeric_limits<double>::infinity();
    for (int s = 0; s < std::max(1, opt.starts); ++s) {
      Eigen::VectorXd u = u0;
      if (s > 0)
        for (auto& x : u) x = std::max(0.0, x * (1.0 + 0.3 * gauss(rng)));
      best = std::min(best, refine_on_grid(w, g, u, opt.refine_iterations));
    }
    res.refined_ratio = best;
    res.ratio = std::min(res.ratio, best);
  }

  if (res.ratio > -1.0 + 1e-3) res.verdict = Verdict::Stable;
  else if (res.ratio < -1.0 - 1e-3) res.verdict = Verdict::Unstable;
  else res.verdict = Verdict::Borderline;
  res.search_caveat = res.verdict == Verdict::Stable && !w.nonnegative();
  return res;
}

MarginResult stability_margin(const InteractionPotential& w, const MarginOptions& opt, const TownesProfile* townes) {
  const int d = w.dimension();
  if (d != 2 && d != 3) throw Error(ErrorCode::InvalidArgument, "stability margin is defined for d = 2, 3");
  TownesProfile local;
  if (d == 2 && !townes) {
    local = compute_townes();
    townes = &local;
  }
  MarginResult res;
  auto probe = [&](double eta) {
    const InteractionPotential m = eta == 0.0 ? w : w.modified(eta);
    MarginStep step{eta, Verdict::Stable, 0.0};
    if (d == 3) {
      auto c = check_classical_stability(m, opt.classical);
      step.verdict = c.verdict;
      step.value = c.best_value;
    } else {
      auto hres = check_hartree_stability_2d(m, opt.hartree, *townes);
      step.verdict = hres.verdict;
      step.value = hres.ratio;
    }
    res.trace.push_back(step);
    return d == 3 ? step.verdict != Verdict::Unstable : step.verdict == Verdict::Stable;
  };
  const bool base = probe(0.0);
  res.base_verdict = res.trace.back().verdict;
  if (!base) {
    res.unstable = true;
    res.eta = 0.0;
    res.cross_check = true;
    return res;
  }
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < opt.bisection_steps; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (probe(mid)) lo = mid;
    else hi = mid;
  }
  res.eta = lo;
  const bool below = res.eta - 0.01 <= 0.0 || probe(res.eta - 0.01);
  const bool above = res.eta + 0.01 >= 1.0 || !probe(res.eta + 0.01);
  res.cross_check = below && above;
  return res;
}

nlohmann::json to_json(const StabilityReport& report) {
  nlohmann::json j;
  if (report.classical) {
    const auto& c = *report.classical;
    j["classical"] = {{"verdict", to_string(c.verdict)},
                      {"best_value", c.best_value},
                      {"fourier_minimum", c.fourier_minimum},
                      {"fourier_certified", c.fourier_certified},
                      {"grid", {{"dim", c.grid.dim}, {"points", c.grid.points}, {"extent", c.grid.extent}}},
                      {"start_values", c.start_values}};
  }
  if (report.hartree) {
    const auto& h = *report.hartree;
    j["hartree"] = {{"verdict", to_string(h.verdict)},
                    {"ratio", h.ratio},
                    {"gaussian_ratio", h.gaussian_ratio},
                    {"gaussian_length", h.gaussian_length},
                    {"townes_ratio", h.townes_ratio},
                    {"townes_length", h.townes_length},
                    {"refined_ratio", h.refined_ratio},
                    {"analytic_lower_bound", h.analytic_lower_bound},
                    {"search_caveat", h.search_caveat}};
  }
  if (report.margin) {
    const auto& m = *report.margin;
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& s : m.trace) trace.push_back({{"eta", s.eta}, {"verdict", to_string(s.verdict)}, {"value", s.value}});
    j["margin"] = {{"eta", m.eta},
                   {"base_verdict", to_string(m.base_verdict)},
                   {"unstable", m.unstable},
                   {"cross_check", m.cross_check},
                   {"trace", trace}};
  }
  if (report.a_star > 0) j["a_star"] = {{"value", report.a_star}, {"error", report.a_star_error}};
  return j;
}

}  // namespace mflab
