#include "mflab/fock.hpp"

#include <cmath>
#include <string>

namespace mflab {

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

FockSector::FockSector(int particles, int modes) : n_(particles), m_(modes) {
  if (particles < 0 || modes < 1) throw Error(ErrorCode::InvalidArgument, "Fock sector needs N >= 0 and M >= 1");
  if (particles > 255) throw Error(ErrorCode::Dimension, "occupations above 255 are not supported");
  const double d = binomial(particles + modes - 1, modes - 1);
  if (d > kMaxDimension)
    throw Error(ErrorCode::Dimension, "sector dimension " + std::to_string(static_cast<long long>(d)) +
                                          " exceeds the cap of 5e6");
  comp_.assign(particles + 1, std::vector<std::size_t>(modes + 1, 0));
  for (int r = 0; r <= particles; ++r)
    for (int m = 1; m <= modes; ++m) comp_[r][m] = static_cast<std::size_t>(binomial(r + m - 1, m - 1));
  dim_ = comp_[particles][modes];
  occ_.resize(dim_ * modes);

  std::vector<int> cur(modes, 0);
  std::size_t row = 0;
  // depth-first enumeration, larger occupations first
  auto rec = [&](auto&& self, int pos, int rest) -> void {
    if (pos == modes - 1) {
      cur[pos] = rest;
      for (int i = 0; i < modes; ++i) occ_[row * modes + i] = static_cast<std::uint8_t>(cur[i]);
      ++row;
      return;
    }
    for (int v = rest; v >= 0; --v) {
      cur[pos] = v;
      self(self, pos + 1, rest - v);
    }
  };
  rec(rec, 0, particles);
}

std::vector<int> FockSector::occupation_vector(std::size_t idx) const {
  std::vector<int> v(m_);
  for (int i = 0; i < m_; ++i) v[i] = occ_[idx * m_ + i];
  return v;
}

std::size_t FockSector::index(const std::uint8_t* occ) const {
  std::size_t rank = 0;
  int rest = n_;
  for (int i = 0; i + 1 < m_; ++i) {
    const int v = occ[i];
    if (v < rest) rank += comp_[rest - v - 1][m_ - i];
    rest -= v;
  }
  return rank;
}

std::size_t FockSector::index(const std::vector<int>& occ) const {
  if (static_cast<int>(occ.size()) != m_) throw Error(ErrorCode::InvalidArgument, "occupation length mismatch");
  int total = 0;
  for (int v : occ) {
    if (v < 0) throw Error(ErrorCode::InvalidArgument, "negative occupation");
    total += v;
  }
  if (total != n_) throw Error(ErrorCode::InvalidArgument, "occupation does not sum to N");
  std::vector<std::uint8_t> o(occ.begin(), occ.end());
  return index(o.data());
}

}  // namespace mflab
