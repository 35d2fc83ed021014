#pragma once
// a* = |Q|^2 for -Delta Q + Q = Q^3 in 2D, by Petviashvili iteration on a
// radial finite-difference grid (cell centres r_j = (j + 1/2) h, Dirichlet at R).

#include <cmath>
#include <vector>

namespace oracle {

struct PetviashviliResult {
  double mass = 0.0;
  double q0 = 0.0;
  int iterations = 0;
};

inline PetviashviliResult townes_mass_petviashvili(double h = 0.005, double radius = 20.0, int max_it = 500) {
  const int n = static_cast<int>(radius / h);
  std::vector<double> r(n), lo(n), di(n), up(n);
  for (int j = 0; j < n; ++j) r[j] = (j + 0.5) * h;
  // (-Delta + 1) as a tridiagonal matrix, symmetric in the r-weighted inner product
  for (int j = 0; j < n; ++j) {
    const double rp = r[j] + 0.5 * h, rm = r[j] - 0.5 * h;
    di[j] = (rp + rm) / (r[j] * h * h) + 1.0;
    lo[j] = j > 0 ? -rm / (r[j] * h * h) : 0.0;
    up[j] = j + 1 < n ? -rp / (r[j] * h * h) : 0.0;
  }
  auto solve = [&](const std::vector<double>& rhs) {
    std::vector<double> c(n), d(n), x(n);
    c[0] = up[0] / di[0];
    d[0] = rhs[0] / di[0];
    for (int j = 1; j < n; ++j) {
      const double m = di[j] - lo[j] * c[j - 1];
      c[j] = up[j] / m;
      d[j] = (rhs[j] - lo[j] * d[j - 1]) / m;
    }
    x[n - 1] = d[n - 1];
    for (int j = n - 2; j >= 0; --j) x[j] = d[j] - c[j] * x[j + 1];
    return x;
  };
  auto weighted = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += a[j] * b[j] * r[j];
    return s;
  };
  std::vector<double> q(n), q3(n);
  for (int j = 0; j < n; ++j) q[j] = 2.0 * std::exp(-r[j] * r[j] / 2.0);
  PetviashviliResult res;
  for (int it = 0; it < max_it; ++it) {
    for (int j = 0; j < n; ++j) q3[j] = q[j] * q[j] * q[j];
    const std::vector<double> lq = solve(q3);  // L^{-1} Q^3
    // stabilizing factor M = <Q, L Q> / <Q, Q^3>
    const double num = weighted(q, q3);
    double qlq = 0.0;
    for (int j = 0; j < n; ++j) {
      double v = di[j] * q[j];
      if (j > 0) v += lo[j] * q[j - 1];
      if (j + 1 < n) v += up[j] * q[j + 1];
      qlq += q[j] * v * r[j];
    }
    const double m = qlq / num;
    double change = 0.0;
    for (int j = 0; j < n; ++j) {
      const double next = std::pow(m, 1.5) * lq[j];
      change = std::max(change, std::abs(next - q[j]));
      q[j] = next;
    }
    res.iterations = it + 1;
    if (change < 1e-13) break;
  }
  res.mass = 2.0 * M_PI * h * weighted(q, q);
  res.q0 = q[0];
  return res;
}

}  // namespace oracle
