#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mflab/grid.hpp"
#include "mflab/interaction.hpp"

namespace mflab {

/// Grid convolution (w * f)_i = h^d sum_j w(x_i - x_j) f_j.
///
/// Gaussian sums are applied as products of banded 1D passes; anything else
/// uses a direct banded sum over a table of kernel values indexed by the
/// absolute offset along each axis.
class PairConvolver {
 public:
  PairConvolver(const Grid& grid, const InteractionPotential& w);

  Eigen::VectorXd apply(const Eigen::VectorXd& f) const;
  /// h^{2d} sum_ij f_i w(x_i - x_j) f_j
  double pair_energy(const Eigen::VectorXd& f) const;

  const Grid& grid() const { return grid_; }
  bool separable() const { return !terms_.empty(); }
  bool zero() const { return zero_; }

 private:
  struct Term {
    double amplitude;
    std::vector<double> taps;  // h * exp(-(m h)^2 / (2 s^2)), m = 0..band
  };
  void pass_(const double* in, double* out, int axis, const std::vector<double>& taps) const;

  Grid grid_;
  bool zero_ = false;
  std::vector<Term> terms_;
  int band_ = 0;
  std::vector<double> table_;  // h^d w(h |m|) over m in [0, band]^d
};

}  // namespace mflab
