#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mflab/error.hpp"

namespace mflab {

/// binom(n, k) as a double (exact while below 2^53).
double binomial(int n, int k);

/// Occupation-number basis of N bosons in M modes, in descending
/// lexicographic order: (N,0,...,0) first, (0,...,0,N) last.
class FockSector {
 public:
  static constexpr double kMaxDimension = 5e6;

  FockSector(int particles, int modes);

  int particles() const { return n_; }
  int modes() const { return m_; }
  std::size_t dimension() const { return dim_; }

  const std::uint8_t* occupation(std::size_t idx) const { return &occ_[idx * m_]; }
  std::vector<int> occupation_vector(std::size_t idx) const;

  std::size_t index(const std::uint8_t* occ) const;
  std::size_t index(const std::vector<int>& occ) const;

  /// number of compositions of r into m parts
  std::size_t compositions(int r, int m) const { return comp_[r][m]; }

 private:
  int n_, m_;
  std::size_t dim_ = 0;
  std::vector<std::vector<std::size_t>> comp_;
  std::vector<std::uint8_t> occ_;
};

}  // namespace mflab
