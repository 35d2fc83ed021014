#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include "mflab/error.hpp"

namespace mflab {

/// Uniform Dirichlet grid on the cube [-extent, extent]^dim. Nodes sit strictly
/// inside the walls: x_j = -extent + (j + 1) h with h = 2 extent / (points + 1).
/// Multi-dimensional nodes are stored with the first axis fastest.
struct Grid {
  int dim = 1;
  int points = 0;
  double extent = 0.0;

  double spacing() const { return 2.0 * extent / (points + 1); }
  double coord(int j) const { return -extent + (j + 1) * spacing(); }
  double cell_volume() const { return std::pow(spacing(), dim); }

  std::size_t size() const {
    std::size_t n = 1;
    for (int a = 0; a < dim; ++a) n *= static_cast<std::size_t>(points);
    return n;
  }

  std::array<int, 3> unflatten(std::size_t idx) const {
    std::array<int, 3> c{0, 0, 0};
    for (int a = 0; a < dim; ++a) {
      c[a] = static_cast<int>(idx % points);
      idx /= points;
    }
    return c;
  }

  double radius(std::size_t idx) const {
    auto c = unflatten(idx);
    double r2 = 0.0;
    for (int a = 0; a < dim; ++a) r2 += coord(c[a]) * coord(c[a]);
    return std::sqrt(r2);
  }

  /// Discrete L2 inner product <u, v> = h^d sum conj(u) v.
  cplx inner(const VectorXc& u, const VectorXc& v) const { return cell_volume() * u.dot(v); }
  double norm2(const VectorXc& u) const { return cell_volume() * u.squaredNorm(); }

  bool operator==(const Grid& o) const {
    return dim == o.dim && points == o.points && extent == o.extent;
  }
};

}  // namespace mflab
