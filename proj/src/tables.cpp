#include "mflab/tables.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "mflab/error.hpp"

namespace mflab {

Rational make_rational(long long num, long long den) {
  if (den == 0) throw Error(ErrorCode::InvalidArgument, "zero denominator");
  if (den < 0) num = -num, den = -den;
  const long long g = std::gcd(num < 0 ? -num : num, den);
  return {num / g, den / g};
}

std::string Rational::str() const {
  return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
}

namespace {

void check(int d, int s) {
  if (d < 1 || d > 3) throw Error(ErrorCode::InvalidArgument, "dimension must be 1, 2 or 3");
  if (s < 0) throw Error(ErrorCode::InvalidArgument, "trap exponent must be positive (0 for the box)");
}

}  // namespace

Rational hartree_rate_exponent(int d, int s) {
  check(d, s);
  // 1/(2 + d/2 + d/s) = 2s / (4s + ds + 2d)
  if (s == 0) return make_rational(2, 4 + d);
  return make_rational(2LL * s, 4LL * s + 1LL * d * s + 2LL * d);
}

Rational beta_threshold(int d, int s, bool strict) {
  check(d, s);
  const long long a = strict ? 1 : 2;
  // 1/(d(a + d/s + d/2)) = 2s / (d(2as + 2d + ds))
  if (s == 0) return make_rational(2, 1LL * d * (2 * a + d));
  return make_rational(2LL * s, 1LL * d * (2 * a * s + 2LL * d + 1LL * d * s));
}

Rational one_d_exponent(int s) {
  check(1, s);
  // 1/(4 + 2/s) = s / (4s + 2)
  if (s == 0) return make_rational(1, 4);
  return make_rational(s, 4LL * s + 2);
}

std::string rate_cell(int d, int s) { return "N^{-" + hartree_rate_exponent(d, s).str() + "}"; }

std::string threshold_cell(int d, int s, bool strict) { return "beta < " + beta_threshold(d, s, strict).str(); }

namespace {

std::string measured_cell(const MeasuredSlopes& m, int d, int s) {
  const auto it = m.find({d, s});
  if (it == m.end()) return "-";
  if (it->second.exact_zero) return "exact (gap 0)";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f +/- %.3f", it->second.slope, it->second.half_width);
  return buf;
}

std::string s_label(int s) { return s == 0 ? "s=inf" : "s=" + std::to_string(s); }

}  // namespace

std::string render_table1(const MeasuredSlopes& measured) {
  std::ostringstream os;
  os << "Rates of convergence to the Hartree energy (beta = 0)\n\n";
  os << "| | d=3 | d=2 | d=1 |\n|---|---|---|---|\n";
  for (int s : {2, 0}) {
    os << "| " << s_label(s);
    for (int d : {3, 2, 1}) os << " | " << rate_cell(d, s);
    os << " |\n";
  }
  os << "\nMeasured log-log slope of e_H - E(N)/N (computed cells only)\n\n";
  os << "| | d=3 | d=2 | d=1 |\n|---|---|---|---|\n";
  for (int s : {2, 0}) {
    os << "| " << s_label(s);
    for (int d : {3, 2, 1}) os << " | " << (d == 3 ? std::string("analytic only") : measured_cell(measured, d, s));
    os << " |\n";
  }
  return os.str();
}

std::string render_table2() {
  std::ostringstream os;
  os << "Maximal value of beta in the NLS limit (beta > 0)\n\n";
  os << "| | d=3, w stable | d=3, w eta-stable | d=2 |\n|---|---|---|---|\n";
  for (int s : {2, 0})
    os << "| " << s_label(s) << " | " << threshold_cell(3, s, false) << " | " << threshold_cell(3, s, true) << " | "
       << threshold_cell(2, s, true) << " |\n";
  return os.str();
}

nlohmann::json tables_json(const MeasuredSlopes& measured) {
  nlohmann::json t1 = nlohmann::json::array(), t2 = nlohmann::json::array();
  for (int s : {2, 0})
    for (int d : {3, 2, 1}) {
      nlohmann::json c = {{"d", d},
                          {"s", s == 0 ? nlohmann::json("inf") : nlohmann::json(s)},
                          {"exponent", hartree_rate_exponent(d, s).str()},
                          {"cell", rate_cell(d, s)}};
      const auto it = measured.find({d, s});
      if (it != measured.end()) {
        c["measured_slope"] = it->second.slope;
        c["measured_half_width"] = it->second.half_width;
        c["exact_zero"] = it->second.exact_zero;
      }
      t1.push_back(c);
    }
  for (int s : {2, 0}) {
    const nlohmann::json sj = s == 0 ? nlohmann::json("inf") : nlohmann::json(s);
    t2.push_back({{"column", "d=3, w stable"}, {"s", sj}, {"threshold", beta_threshold(3, s, false).str()}});
    t2.push_back({{"column", "d=3, w eta-stable"}, {"s", sj}, {"threshold", beta_threshold(3, s, true).str()}});
    t2.push_back({{"column", "d=2"}, {"s", sj}, {"threshold", beta_threshold(2, s, true).str()}});
  }
  return {{"table1", t1}, {"table2", t2}};
}

}  // namespace mflab
