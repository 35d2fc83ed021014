#pragma once

#include <string>
#include <vector>

namespace mflab {

struct RateFit {
  bool exact_zero = false;  // every y was exactly 0; no fit
  double slope = 0.0;
  double intercept = 0.0;   // of log y
  double half_width = 0.0;  // 1.96 standard errors of the slope
  int points = 0;           // points used (nonzero y)
  int excluded_zeros = 0;
};

/// Least squares of log y against log x; exact zeros are excluded. Needs at
/// least 4 usable points unless all y vanish.
RateFit fit_rate(const std::vector<double>& x, const std::vector<double>& y);

/// Ordinary least squares y = a + b x; returns {a, b}.
std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace mflab
