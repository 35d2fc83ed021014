#include <algorithm>
#include <cmath>
#include <numbers>

#include "mflab/interaction.hpp"

namespace mflab {

namespace {

struct Trajectory {
  std::vector<double> q, p;  // at r_i = i * step
  ShotOutcome outcome = ShotOutcome::Undecided;
};

// Q'' = -Q'/r + Q - Q^3, started at r = step from the Taylor expansion at 0.
Trajectory integrate(double q0, double step, double r_max, bool keep) {
  Trajectory t;
  const double c2 = 0.5 * (q0 - q0 * q0 * q0);
  double r = step;
  double q = q0 + 0.5 * c2 * step * step;
  double p = c2 * step;
  if (keep) {
    t.q = {q0, q};
    t.p = {0.0, p};
  }
  auto rhs = [](double r_, double q_, double p_, double& dq, double& dp) {
    dq = p_;
    dp = -p_ / r_ + q_ - q_ * q_ * q_;
  };
  const long steps = static_cast<long>(std::llround(r_max / step));
  for (long i = 1; i < steps; ++i) {
    double k1q, k1p, k2q, k2p, k3q, k3p, k4q, k4p;
    rhs(r, q, p, k1q, k1p);
    rhs(r + 0.5 * step, q + 0.5 * step * k1q, p + 0.5 * step * k1p, k2q, k2p);
    rhs(r + 0.5 * step, q + 0.5 * step * k2q, p + 0.5 * step * k2p, k3q, k3p);
    rhs(r + step, q + step * k3q, p + step * k3p, k4q, k4p);
    q += step / 6.0 * (k1q + 2 * k2q + 2 * k3q + k4q);
    p += step / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
    r += step;
    if (keep) {
      t.q.push_back(q);
      t.p.push_back(p);
    }
    if (q < 0.0) {
      t.outcome = ShotOutcome::CrossesZero;
      return t;
    }
    if (p > 0.0) {
      t.outcome = ShotOutcome::TurnsUp;
      return t;
    }
  }
  return t;
}

TownesProfile solve(double step, const TownesOptions& opt) {
  double lo = opt.bracket_low, hi = opt.bracket_high;
  if (shoot_townes(lo, step, opt.r_max) != ShotOutcome::TurnsUp ||
      shoot_townes(hi, step, opt.r_max) != ShotOutcome::CrossesZero)
    throw Error(ErrorCode::InvalidArgument, "Townes shooting bracket not found (step too large?)");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const auto o = shoot_townes(mid, step, opt.r_max);
    if (o == ShotOutcome::CrossesZero) hi = mid;
    else if (o == ShotOutcome::TurnsUp) lo = mid;
    else break;
  }
  const auto a = integrate(lo, step, opt.r_max, true);
  const auto b = integrate(hi, step, opt.r_max, true);
  const std::size_t len = std::min(a.q.size(), b.q.size());

  TownesProfile t;
  t.q0 = 0.5 * (lo + hi);
  t.step = step;
  std::size_t trusted = 0;
  for (std::size_t i = 0; i < len; ++i) {
    const double qm = 0.5 * (a.q[i] + b.q[i]);
    if (qm <= 0.0 || std::abs(a.q[i] - b.q[i]) > 1e-6 * qm) break;
    trusted = i;
    t.r.push_back(i * step);
    t.q.push_back(qm);
    t.dq.push_back(0.5 * (a.p[i] + b.p[i]));
  }
  t.trusted_radius = trusted * step;

  double mass = 0.0;
  for (std::size_t i = 0; i + 1 < t.q.size(); ++i)
    mass += 0.5 * step * (t.q[i] * t.q[i] * t.r[i] + t.q[i + 1] * t.q[i + 1] * t.r[i + 1]);
  t.mass = 2.0 * std::numbers::pi * mass;

  for (std::size_t i = 1; i < t.q.size(); ++i)
    if (!(t.q[i] < t.q[i - 1]) || t.q[i] <= 0.0) t.monotone = false;

  // Q'' from fourth-order differences of Q'
  double res = 0.0;
  for (std::size_t i = 2; i + 2 < t.q.size(); ++i) {
    const double d2 = (-t.dq[i + 2] + 8 * t.dq[i + 1] - 8 * t.dq[i - 1] + t.dq[i - 2]) / (12.0 * step);
    const double q = t.q[i];
    res = std::max(res, std::abs(d2 + t.dq[i] / t.r[i] - q + q * q * q));
  }
  t.residual = res;
  return t;
}

}  // namespace

ShotOutcome shoot_townes(double q0, double step, double r_max) {
  return integrate(q0, step, r_max, false).outcome;
}

TownesProfile compute_townes(const TownesOptions& opt) {
  TownesProfile t = solve(opt.step, opt);
  std::vector<double> history{t.mass};
  double step = opt.step;
  for (int k = 0; k < opt.max_halvings; ++k) {
    step *= 0.5;
    TownesProfile next = solve(step, opt);
    history.push_back(next.mass);
    const double change = std::abs(next.mass - t.mass) / next.mass;
    t = std::move(next);
    if (change < opt.relative_tolerance) break;
  }
  t.mass_history = history;
  return t;
}

const TownesProfile& townes_reference() {
  static const TownesProfile t = compute_townes();
  return t;
}

double TownesProfile::operator()(double radius) const {
  if (q.empty() || radius >= trusted_radius) return 0.0;
  const double x = radius / step;
  const std::size_t i = static_cast<std::size_t>(x);
  if (i + 1 >= q.size()) return q.back();
  const double f = x - static_cast<double>(i);
  return (1.0 - f) * q[i] + f * q[i + 1];
}

}  // namespace mflab
