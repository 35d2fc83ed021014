#include "mflab/fit.hpp"

#include <cmath>

#include "mflab/error.hpp"

namespace mflab {

std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorCode::InvalidArgument, "linear fit needs >= 2 points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw Error(ErrorCode::InvalidArgument, "linear fit needs distinct abscissae");
  const double b = sxy / sxx;
  return {my - b * mx, b};
}

RateFit fit_rate(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw Error(ErrorCode::InvalidArgument, "fit_rate: size mismatch");
  RateFit f;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || y[i] < 0.0) throw Error(ErrorCode::InvalidArgument, "fit_rate needs x > 0 and y >= 0");
    if (y[i] == 0.0) {
      ++f.excluded_zeros;
      continue;
    }
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  if (lx.empty() && !x.empty()) {
    f.exact_zero = true;
    return f;
  }
  if (lx.size() < 4) throw Error(ErrorCode::InvalidArgument, "fit_rate needs at least 4 nonzero points");
  const auto [a, b] = linear_fit(lx, ly);
  f.slope = b;
  f.intercept = a;
  f.points = static_cast<int>(lx.size());
  double mx = 0;
  for (double v : lx) mx += v;
  mx /= lx.size();
  double sxx = 0, rss = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    const double r = ly[i] - (a + b * lx[i]);
    rss += r * r;
  }
  const double s2 = rss / (lx.size() - 2);
  f.half_width = 1.96 * std::sqrt(s2 / sxx);
  return f;
}

}  // namespace mflab
