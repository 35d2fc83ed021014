#pragma once
// Dense first-quantized constructions on the full tensor space (C^M)^{(x)N}.
// Only usable for tiny N and M; they share nothing with the occupation-number
// code except the ordering of the Fock basis, used to compare results.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "mflab/fock.hpp"
#include "mflab/manybody.hpp"

namespace oracle {

using mflab::cplx;
using mflab::MatrixXc;
using mflab::VectorXc;

inline long ipow(long b, int e) {
  long r = 1;
  while (e-- > 0) r *= b;
  return r;
}

/// Digits of a tensor index, first particle most significant.
inline std::vector<int> word(long idx, int n, int m) {
  std::vector<int> w(n);
  for (int i = n - 1; i >= 0; --i) {
    w[i] = static_cast<int>(idx % m);
    idx /= m;
  }
  return w;
}

inline long index_of(const std::vector<int>& w, int m) {
  long idx = 0;
  for (int a : w) idx = idx * m + a;
  return idx;
}

inline double factorial(int n) { return std::tgamma(n + 1.0); }

/// Columns: normalized symmetrized tensors, one per occupation vector of the sector.
inline MatrixXc symmetric_embedding(const mflab::FockSector& s) {
  const int n = s.particles(), m = s.modes();
  const long dim = ipow(m, n);
  MatrixXc e = MatrixXc::Zero(dim, static_cast<Eigen::Index>(s.dimension()));
  for (long t = 0; t < dim; ++t) {
    std::vector<int> occ(m, 0);
    for (int a : word(t, n, m)) ++occ[a];
    double words = factorial(n);
    for (int q : occ) words /= factorial(q);
    e(t, static_cast<Eigen::Index>(s.index(occ))) = 1.0 / std::sqrt(words);
  }
  return e;
}

/// sum_i h_i + 1/(N-1) sum_{i<j} W_ij on (C^M)^{(x)N}; W[(a,b),(c,d)] = W(a,b,c,d).
inline MatrixXc hamiltonian(int n, const MatrixXc& h, const mflab::TwoBodyTensor& w) {
  const int m = static_cast<int>(h.rows());
  const long dim = ipow(m, n);
  MatrixXc out = MatrixXc::Zero(dim, dim);
  for (long col = 0; col < dim; ++col) {
    const auto wc = word(col, n, m);
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < m; ++a) {
        auto wr = wc;
        wr[i] = a;
        out(index_of(wr, m), col) += h(a, wc[i]);
      }
    if (n < 2) continue;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        for (int a = 0; a < m; ++a)
          for (int b = 0; b < m; ++b) {
            auto wr = wc;
            wr[i] = a;
            wr[j] = b;
            out(index_of(wr, m), col) += w(a, b, wc[i], wc[j]) / static_cast<double>(n - 1);
          }
  }
  return out;
}

/// Tr_{k+1 -> N} of the operator `g` on N particles, keeping the first k.
inline MatrixXc partial_trace(const MatrixXc& g, int n, int m, int k) {
  const long dk = ipow(m, k), rest = ipow(m, n - k);
  MatrixXc out = MatrixXc::Zero(dk, dk);
  for (long a = 0; a < dk; ++a)
    for (long b = 0; b < dk; ++b) {
      cplx s = 0.0;
      for (long r = 0; r < rest; ++r) s += g(a * rest + r, b * rest + r);
      out(a, b) = s;
    }
  return out;
}

/// Projector onto span{e_a : low[a]} tensored k times then onto high modes n-k times.
inline Eigen::VectorXd split_mask(int n, int m, int k, const std::vector<bool>& low) {
  const long dim = ipow(m, n);
  Eigen::VectorXd mask(dim);
  for (long t = 0; t < dim; ++t) {
    const auto w = word(t, n, m);
    bool ok = true;
    for (int i = 0; i < n; ++i) ok = ok && (i < k ? low[w[i]] : !low[w[i]]);
    mask[t] = ok ? 1.0 : 0.0;
  }
  return mask;
}

/// binom(N,k) Tr_{k+1 -> N}[(P-^{(x)k} (x) P+^{(x)(N-k)}) Gamma (same)], on (C^M)^{(x)k}.
inline MatrixXc localized_block(const MatrixXc& gamma, int n, int m, int k, const std::vector<bool>& low) {
  const Eigen::VectorXd mask = split_mask(n, m, k, low);
  const MatrixXc projected = mask.asDiagonal() * gamma * mask.asDiagonal();
  return mflab::binomial(n, k) * partial_trace(projected, n, m, k);
}

/// Rows/columns of a k-particle tensor operator restricted to words in the given modes.
inline MatrixXc restrict_modes(const MatrixXc& g, int k, int m, const std::vector<int>& modes) {
  const int ml = static_cast<int>(modes.size());
  const long dl = ipow(ml, k);
  MatrixXc out(dl, dl);
  auto full = [&](long t) {
    auto w = word(t, k, ml);
    for (auto& a : w) a = modes[a];
    return index_of(w, m);
  };
  for (long a = 0; a < dl; ++a)
    for (long b = 0; b < dl; ++b) out(a, b) = g(full(a), full(b));
  return out;
}

}  // namespace oracle
