#include "mflab/radial.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mflab/error.hpp"

namespace mflab::radial {

double sphere_area(int d) {
  switch (d) {
    case 1: return 2.0;
    case 2: return 2.0 * std::numbers::pi;
    case 3: return 4.0 * std::numbers::pi;
    default: throw Error(ErrorCode::InvalidArgument, "radial quadrature supports d = 1, 2, 3");
  }
}

double simpson_weight(int i, int n, double h) {
  if (i == 0 || i == n) return h / 3.0;
  return (i % 2 == 1) ? 4.0 * h / 3.0 : 2.0 * h / 3.0;
}

double integral(int d, const std::function<double(double)>& f, double rmax, int intervals) {
  if (intervals % 2) ++intervals;
  const double h = rmax / intervals;
  double sum = 0.0;
  for (int i = 0; i <= intervals; ++i) {
    const double r = i * h;
    sum += simpson_weight(i, intervals, h) * f(r) * std::pow(r, d - 1);
  }
  return sphere_area(d) * sum;
}

double fourier(int d, const std::function<double(double)>& f, double k, double rmax,
               int min_intervals) {
  // keep roughly 40 nodes per oscillation period
  int intervals = std::max(min_intervals, static_cast<int>(std::ceil(k * rmax * 40.0 / (2 * std::numbers::pi))));
  if (intervals % 2) ++intervals;
  const double h = rmax / intervals;
  double sum = 0.0;
  for (int i = 0; i <= intervals; ++i) {
    const double r = i * h;
    const double kr = k * r;
    double kernel = 0.0;
    switch (d) {
      case 1: kernel = 2.0 * std::cos(kr); break;
      case 2: kernel = 2.0 * std::numbers::pi * std::cyl_bessel_j(0.0, kr) * r; break;
      case 3: kernel = 4.0 * std::numbers::pi * r * r * (kr < 1e-8 ? 1.0 - kr * kr / 6.0 : std::sin(kr) / kr); break;
      default: throw Error(ErrorCode::InvalidArgument, "radial Fourier transform supports d = 1, 2, 3");
    }
    sum += simpson_weight(i, intervals, h) * f(r) * kernel;
  }
  return sum;
}

}  // namespace mflab::radial
