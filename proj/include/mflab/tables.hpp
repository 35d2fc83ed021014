#pragma once

#include <map>
#include <string>
#include <utility>

#include <json.hpp>

#include "mflab/fit.hpp"

namespace mflab {

struct Rational {
  long long num = 0;
  long long den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const;
  bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
};

Rational make_rational(long long num, long long den);

/// Trap exponent s as an integer; 0 stands for s = infinity (box).
/// Exponent of the beta = 0 Hartree rate: 1 / (2 + d/2 + d/s).
Rational hartree_rate_exponent(int d, int s);
/// Largest admissible beta: 1/(d(1 + d/s + d/2)) (strict) or 1/(d(2 + d/s + d/2)).
Rational beta_threshold(int d, int s, bool strict);
/// 1D many-body exponent 1 / (4 + 2/s).
Rational one_d_exponent(int s);

/// "N^{-1/5}"
std::string rate_cell(int d, int s);
/// "beta < 1/15"
std::string threshold_cell(int d, int s, bool strict);

/// Measured slopes keyed by (d, s); cells without data are rendered as "-".
using MeasuredSlopes = std::map<std::pair<int, int>, RateFit>;

std::string render_table1(const MeasuredSlopes& measured);
std::string render_table2();
nlohmann::json tables_json(const MeasuredSlopes& measured);

}  // namespace mflab
