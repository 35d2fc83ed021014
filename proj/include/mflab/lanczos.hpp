#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

#include "mflab/error.hpp"

namespace mflab {

struct LanczosOptions {
  int krylov = 150;               // maximal Krylov dimension per restart cycle
  int max_restarts = 200;
  double tolerance = 1e-9;        // residual < tolerance * (1 + |E|)
  std::uint64_t seed = 1;
  double memory_limit = 1.5e9;    // bytes for the Krylov basis
};

template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

template <class S>
struct LanczosResult {
  double value = 0.0;
  Vec<S> vector;
  double residual = 0.0;
  int matvecs = 0;
  int restarts = 0;
  bool converged = false;
};

/// Lowest eigenvalue and eigenvector of the symmetric tridiagonal matrix
/// (alpha on the diagonal, beta below it).
std::pair<double, Eigen::VectorXd> tridiagonal_lowest(const std::vector<double>& alpha, const std::vector<double>& beta);

namespace detail {

template <class S>
Vec<S> random_vector(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Vec<S> v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if constexpr (std::is_same_v<S, double>) v[i] = g(rng);
    else v[i] = S(g(rng), g(rng));
  }
  return v;
}

template <class S>
void deflate(Vec<S>& w, const std::vector<Vec<S>>& basis) {
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& b : basis) w -= b * b.dot(w);
}

}  // namespace detail

/// Restarted Lanczos with full (two-pass) reorthogonalization for the lowest
/// eigenpair of a Hermitian operator `op(in, out)` of size n. Vectors in
/// `deflated` (orthonormal) are projected out, which yields the next
/// eigenpair above them.
template <class S, class Op>
LanczosResult<S> lanczos_lowest(const Op& op, Eigen::Index n, const LanczosOptions& opt,
                                const std::vector<Vec<S>>& deflated = {}, const Vec<S>* start = nullptr) {
  using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index free_dim = n - static_cast<Eigen::Index>(deflated.size());
  if (free_dim < 1) throw Error(ErrorCode::InvalidArgument, "Lanczos: nothing left after deflation");
  const double bytes = static_cast<double>(n) * sizeof(S);
  Eigen::Index m = std::min<Eigen::Index>(opt.krylov, free_dim);
  m = std::min<Eigen::Index>(m, std::max<Eigen::Index>(8, static_cast<Eigen::Index>(opt.memory_limit / bytes) - 1));

  LanczosResult<S> res;
  Vec<S> v = start ? *start : detail::random_vector<S>(n, opt.seed);
  detail::deflate(v, deflated);
  if (v.norm() < 1e-300) v = detail::random_vector<S>(n, opt.seed + 1), detail::deflate(v, deflated);
  v.normalize();

  Mat basis(n, m + 1);
  Vec<S> w(n), x(n), cur(n);
  double best_res = std::numeric_limits<double>::infinity();
  for (int cycle = 0; cycle <= opt.max_restarts; ++cycle) {
    res.restarts = cycle;
    std::vector<double> alpha, beta;
    basis.col(0) = v;
    Eigen::Index used = 0;
    for (Eigen::Index j = 0; j < m; ++j) {
      cur = basis.col(j);
      op(cur, w);
      ++res.matvecs;
      detail::deflate(w, deflated);
      const double a = std::real(basis.col(j).dot(w));
      alpha.push_back(a);
      for (int pass = 0; pass < 2; ++pass) {
        const Vec<S> c = basis.leftCols(j + 1).adjoint() * w;
        w.noalias() -= basis.leftCols(j + 1) * c;
      }
      detail::deflate(w, deflated);
      const double b = w.norm();
      used = j + 1;
      bool stop = b < 1e-13 * (1.0 + std::abs(a)) || j + 1 == m;
      if (!stop && (j % 4 == 3)) {
        auto [theta, s] = tridiagonal_lowest(alpha, beta);
        if (b * std::abs(s[j]) < 0.1 * opt.tolerance * (1.0 + std::abs(theta))) stop = true;
      }
      if (stop) break;
      beta.push_back(b);
      basis.col(j + 1) = w / b;
    }
    if (static_cast<Eigen::Index>(beta.size()) >= used) beta.resize(used - 1);
    auto [theta, s] = tridiagonal_lowest(alpha, beta);
    x.noalias() = basis.leftCols(used) * s.cast<S>();
    detail::deflate(x, deflated);
    x.normalize();
    op(x, w);
    ++res.matvecs;
    detail::deflate(w, deflated);
    const double rq = std::real(x.dot(w));
    const double r = (w - rq * x).norm();
    if (r < best_res) {
      best_res = r;
      res.value = rq;
      res.vector = x;
      res.residual = r;
    }
    if (r < opt.tolerance * (1.0 + std::abs(rq))) {
      res.converged = true;
      break;
    }
    v = x;
  }
  return res;
}

}  // namespace mflab
