#include "mflab/convolution.hpp"

#include <algorithm>
#include <cmath>

namespace mflab {

PairConvolver::PairConvolver(const Grid& grid, const InteractionPotential& w) : grid_(grid) {
  if (w.dimension() != grid.dim) throw Error(ErrorCode::InvalidArgument, "potential and grid dimensions differ");
  zero_ = w.is_zero();
  if (zero_) return;
  const double h = grid.spacing();
  const int n = grid.points;
  if (const auto& g = w.gaussian_terms()) {
    for (const auto& t : *g) {
      const int band = std::min(n - 1, static_cast<int>(std::ceil(9.0 * t.width / h)));
      Term term{t.amplitude, std::vector<double>(band + 1)};
      for (int m = 0; m <= band; ++m) term.taps[m] = h * std::exp(-(m * h) * (m * h) / (2.0 * t.width * t.width));
      terms_.push_back(std::move(term));
    }
    return;
  }
  band_ = std::min(n - 1, static_cast<int>(std::ceil(w.range() / h)));
  const int b1 = band_ + 1;
  std::size_t count = 1;
  for (int a = 0; a < grid.dim; ++a) count *= b1;
  table_.resize(count);
  const double vol = grid.cell_volume();
  for (std::size_t idx = 0; idx < count; ++idx) {
    std::size_t rest = idx;
    double r2 = 0.0;
    for (int a = 0; a < grid.dim; ++a) {
      const double m = static_cast<double>(rest % b1);
      rest /= b1;
      r2 += m * m;
    }
    table_[idx] = vol * w(h * std::sqrt(r2));
  }
}

void PairConvolver::pass_(const double* in, double* out, int axis, const std::vector<double>& taps) const {
  const int n = grid_.points;
  const int band = static_cast<int>(taps.size()) - 1;
  std::size_t stride = 1;
  for (int a = 0; a < axis; ++a) stride *= n;
  const std::size_t outer = grid_.size() / (stride * n);
  for (std::size_t hi = 0; hi < outer; ++hi) {
    for (std::size_t lo = 0; lo < stride; ++lo) {
      const std::size_t base = hi * stride * n + lo;
      for (int j = 0; j < n; ++j) {
        const int m0 = std::max(-band, -j), m1 = std::min(band, n - 1 - j);
        double s = 0.0;
        for (int m = m0; m <= m1; ++m) s += taps[std::abs(m)] * in[base + (j + m) * stride];
        out[base + j * stride] = s;
      }
    }
  }
}

Eigen::VectorXd PairConvolver::apply(const Eigen::VectorXd& f) const {
  const std::size_t size = grid_.size();
  if (static_cast<std::size_t>(f.size()) != size) throw Error(ErrorCode::InvalidArgument, "vector does not match grid");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(size);
  if (zero_) return out;
  if (!terms_.empty()) {
    Eigen::VectorXd a(size), b(size);
    for (const auto& t : terms_) {
      a = f;
      for (int axis = 0; axis < grid_.dim; ++axis) {
        pass_(a.data(), b.data(), axis, t.taps);
        a.swap(b);
      }
      out += t.amplitude * a;
    }
    return out;
  }
  const int n = grid_.points, b1 = band_ + 1;
  const int d = grid_.dim;
  for (std::size_t i = 0; i < size; ++i) {
    const auto c = grid_.unflatten(i);
    int lo[3] = {0, 0, 0}, hi[3] = {0, 0, 0};
    for (int a = 0; a < d; ++a) {
      lo[a] = std::max(0, c[a] - band_);
      hi[a] = std::min(n - 1, c[a] + band_);
    }
    double s = 0.0;
    if (d == 1) {
      for (int j = lo[0]; j <= hi[0]; ++j) s += table_[std::abs(j - c[0])] * f[j];
    } else if (d == 2) {
      for (int y = lo[1]; y <= hi[1]; ++y) {
        const double* row = &table_[static_cast<std::size_t>(std::abs(y - c[1])) * b1];
        const double* fr = f.data() + static_cast<std::size_t>(y) * n;
        for (int x = lo[0]; x <= hi[0]; ++x) s += row[std::abs(x - c[0])] * fr[x];
      }
    } else {
      for (int z = lo[2]; z <= hi[2]; ++z)
        for (int y = lo[1]; y <= hi[1]; ++y) {
          const double* row =
              &table_[(static_cast<std::size_t>(std::abs(z - c[2])) * b1 + std::abs(y - c[1])) * b1];
          const double* fr = f.data() + (static_cast<std::size_t>(z) * n + y) * n;
          for (int x = lo[0]; x <= hi[0]; ++x) s += row[std::abs(x - c[0])] * fr[x];
        }
    }
    out[i] = s;
  }
  return out;
}

double PairConvolver::pair_energy(const Eigen::VectorXd& f) const {
  if (zero_) return 0.0;
  return grid_.cell_volume() * f.dot(apply(f));
}

}  // namespace mflab
