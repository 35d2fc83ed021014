#include "mflab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "mflab/config.hpp"
#include "mflab/fockloc.hpp"
#include "mflab/io.hpp"
#include "mflab/manybody.hpp"
#include "mflab/meanfield.hpp"
#include "mflab/tables.hpp"

namespace mflab {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

InteractionPotential ExperimentConfig::potential() const { return InteractionPotential::from_json(trap.dim, interaction); }

double ExperimentConfig::cutoff(int n, double beta, double epsilon) const {
  if (cutoff_rule == CutoffRule::Fixed) return cutoff_value;
  return truncation_cutoff_rule(trap.dim, n, beta, epsilon, cutoff_constant);
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json t = trap.to_json();
  return {{"name", name},
          {"trap", t},
          {"grid", grid_to_json(grid)},
          {"interaction", interaction},
          {"n", ns},
          {"beta", betas},
          {"epsilon", epsilons},
          {"modes", modes},
          {"cutoff",
           {{"rule", cutoff_rule == CutoffRule::Fixed ? "fixed" : "lemma"},
            {"value", cutoff_value},
            {"constant", cutoff_constant}}},
          {"seed", seed},
          {"meanfield", {{"enabled", meanfield}, {"starts", meanfield_starts}}},
          {"lanczos", {{"tolerance", lanczos_tolerance}, {"krylov", lanczos_krylov}}}};
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  SchemaChecker sc;
  ExperimentConfig c;
  if (!sc.object(j, "", {"name", "trap", "grid", "interaction", "n", "beta", "epsilon", "modes", "cutoff", "seed",
                         "meanfield", "lanczos"}))
    sc.finish();
  c.name = sc.string(j, "", "name", c.name);
  if (sc.require(j, "", "trap")) c.trap = parse_trap(j.at("trap"), "trap", sc);
  if (j.contains("grid")) c.grid = parse_grid(j.at("grid"), "grid", sc);
  if (sc.require(j, "", "interaction")) c.interaction = check_interaction(j.at("interaction"), "interaction", sc);

  if (sc.require(j, "", "n")) {
    const auto& v = j.at("n");
    const nlohmann::json list = v.is_array() ? v : nlohmann::json::array({v});
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (!list[i].is_number_integer() || list[i].get<int>() < 1)
        sc.fail("n[" + std::to_string(i) + "]", "expected a positive integer");
      else c.ns.push_back(list[i].get<int>());
    }
    if (list.empty()) sc.fail("n", "must not be empty");
  }
  if (j.contains("beta")) c.betas = sc.numbers(j, "", "beta");
  if (j.contains("epsilon")) c.epsilons = sc.numbers(j, "", "epsilon");
  if (c.betas.empty()) sc.fail("beta", "must not be empty");
  if (c.epsilons.empty()) sc.fail("epsilon", "must not be empty");
  for (std::size_t i = 0; i < c.betas.size(); ++i)
    if (!(c.betas[i] >= 0.0 && c.betas[i] < 1.0)) sc.fail("beta[" + std::to_string(i) + "]", "must lie in [0, 1)");
  for (std::size_t i = 0; i < c.epsilons.size(); ++i)
    if (!(c.epsilons[i] > 0.0 && c.epsilons[i] <= 1.0))
      sc.fail("epsilon[" + std::to_string(i) + "]", "must lie in (0, 1]");
  c.modes = sc.integer(j, "", "modes", c.modes);
  if (c.modes < 1) sc.fail("modes", "must be at least 1");

  if (j.contains("cutoff")) {
    const auto& cj = j.at("cutoff");
    if (sc.object(cj, "cutoff", {"rule", "value", "constant"})) {
      const std::string rule = sc.string(cj, "cutoff", "rule", "fixed");
      if (rule == "fixed") c.cutoff_rule = CutoffRule::Fixed;
      else if (rule == "lemma") c.cutoff_rule = CutoffRule::Lemma;
      else sc.fail("cutoff.rule", "expected fixed or lemma");
      c.cutoff_value = sc.number(cj, "cutoff", "value", c.cutoff_value);
      c.cutoff_constant = sc.number(cj, "cutoff", "constant", c.cutoff_constant);
      if (!(c.cutoff_constant > 0.0)) sc.fail("cutoff.constant", "must be positive");
    }
  }
  if (j.contains("seed")) {
    const auto& sj = j.at("seed");
    if (!sj.is_number_integer() || (!sj.is_number_unsigned() && sj.get<long long>() < 0))
      sc.fail("seed", "expected a non-negative integer");
    else c.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("meanfield")) {
    const auto& mj = j.at("meanfield");
    if (sc.object(mj, "meanfield", {"enabled", "starts"})) {
      c.meanfield = sc.boolean(mj, "meanfield", "enabled", c.meanfield);
      c.meanfield_starts = sc.integer(mj, "meanfield", "starts", c.meanfield_starts);
      if (c.meanfield_starts < 0) sc.fail("meanfield.starts", "must be non-negative");
    }
  }
  if (j.contains("lanczos")) {
    const auto& lj = j.at("lanczos");
    if (sc.object(lj, "lanczos", {"tolerance", "krylov"})) {
      c.lanczos_tolerance = sc.number(lj, "lanczos", "tolerance", c.lanczos_tolerance);
      c.lanczos_krylov = sc.integer(lj, "lanczos", "krylov", c.lanczos_krylov);
      if (!(c.lanczos_tolerance > 0.0)) sc.fail("lanczos.tolerance", "must be positive");
      if (c.lanczos_krylov < 8) sc.fail("lanczos.krylov", "must be at least 8");
    }
  }
  if (sc.errors().empty()) {
    try {
      const auto w = c.potential();
      (void)w;
    } catch (const std::exception& e) {
      sc.fail("interaction", e.what());
    }
  }
  sc.finish();
  c.grid.modes = std::max(c.grid.modes, c.modes);
  return c;
}

// ---------------------------------------------------------------------------
// Rows
// ---------------------------------------------------------------------------

std::uint64_t derive_seed(std::uint64_t base, int n, double beta, double epsilon) {
  auto mix = [](std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  };
  std::uint64_t b, e;
  std::memcpy(&b, &beta, sizeof b);
  std::memcpy(&e, &epsilon, sizeof e);
  return mix(mix(mix(base) ^ static_cast<std::uint64_t>(n)) ^ b) ^ mix(e);
}

std::string SweepRow::key() const {
  return "N=" + std::to_string(n) + "|beta=" + format_double(beta) + "|eps=" + format_double(epsilon);
}

namespace {

double get_number(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return v.get<double>();
}

}  // namespace

nlohmann::json SweepRow::to_json() const {
  return {{"n", n},
          {"beta", beta},
          {"epsilon", epsilon},
          {"modes", modes},
          {"status", status},
          {"error", error},
          {"e_many", e_many},
          {"e_hartree_modes", e_hartree_modes},
          {"e_hartree_eps_modes", e_hartree_eps_modes},
          {"e_hartree", e_hartree},
          {"e_hartree_eps", e_hartree_eps},
          {"e_nls", e_nls},
          {"variational_gap", variational_gap},
          {"variational_ok", variational_ok},
          {"residual", residual},
          {"matvecs", matvecs},
          {"converged", converged},
          {"tensor_symmetry_defect", tensor_symmetry_defect},
          {"identity_defect", identity_defect},
          {"localization_n1", localization_n1},
          {"localization_n2", localization_n2},
          {"normalization_minus", normalization_minus},
          {"normalization_plus", normalization_plus},
          {"cutoff", cutoff},
          {"n_low", n_low},
          {"definetti_distance", definetti_distance},
          {"definetti_bound", definetti_bound},
          {"mass_deficit", mass_deficit},
          {"deficit_bound", deficit_bound},
          {"lambda_max", lambda_max},
          {"depletion", depletion},
          {"overlap", overlap},
          {"condensate_distance", condensate_distance}};
}

SweepRow SweepRow::from_json(const nlohmann::json& j) {
  SweepRow r;
  r.n = j.at("n").get<int>();
  r.beta = get_number(j, "beta");
  r.epsilon = get_number(j, "epsilon");
  r.modes = j.at("modes").get<int>();
  r.status = j.at("status").get<std::string>();
  r.error = j.at("error").get<std::string>();
  r.e_many = get_number(j, "e_many");
  r.e_hartree_modes = get_number(j, "e_hartree_modes");
  r.e_hartree_eps_modes = get_number(j, "e_hartree_eps_modes");
  r.e_hartree = get_number(j, "e_hartree");
  r.e_hartree_eps = get_number(j, "e_hartree_eps");
  r.e_nls = get_number(j, "e_nls");
  r.variational_gap = get_number(j, "variational_gap");
  r.variational_ok = j.at("variational_ok").get<bool>();
  r.residual = get_number(j, "residual");
  r.matvecs = j.at("matvecs").get<int>();
  r.converged = j.at("converged").get<bool>();
  r.tensor_symmetry_defect = get_number(j, "tensor_symmetry_defect");
  r.identity_defect = get_number(j, "identity_defect");
  r.localization_n1 = get_number(j, "localization_n1");
  r.localization_n2 = get_number(j, "localization_n2");
  r.normalization_minus = get_number(j, "normalization_minus");
  r.normalization_plus = get_number(j, "normalization_plus");
  r.cutoff = get_number(j, "cutoff");
  r.n_low = j.at("n_low").get<int>();
  r.definetti_distance = get_number(j, "definetti_distance");
  r.definetti_bound = get_number(j, "definetti_bound");
  r.mass_deficit = get_number(j, "mass_deficit");
  r.deficit_bound = get_number(j, "deficit_bound");
  r.lambda_max = get_number(j, "lambda_max");
  r.depletion = get_number(j, "depletion");
  r.overlap = get_number(j, "overlap");
  r.condensate_distance = get_number(j, "condensate_distance");
  return r;
}

const std::vector<std::string>& sweep_columns() {
  static const std::vector<std::string> cols = {
      "n",          "beta",          "epsilon",          "modes",           "status",
      "e_many",     "e_hartree_modes", "e_hartree_eps_modes", "e_hartree",   "e_hartree_eps",
      "e_nls",      "variational_gap", "variational_ok",  "residual",        "matvecs",
      "converged",  "tensor_symmetry_defect", "identity_defect", "localization_n1", "localization_n2",
      "normalization_minus", "normalization_plus", "cutoff", "n_low",     "definetti_distance",
      "definetti_bound", "mass_deficit", "deficit_bound",  "lambda_max",      "depletion",
      "overlap",    "condensate_distance", "error"};
  return cols;
}

std::string sweep_csv_line(const SweepRow& r) {
  const nlohmann::json j = r.to_json();
  std::ostringstream os;
  bool first = true;
  for (const auto& c : sweep_columns()) {
    if (!first) os << ',';
    first = false;
    const auto& v = j.at(c);
    if (v.is_string()) {
      std::string s = v.get<std::string>();
      std::replace(s.begin(), s.end(), '"', '\'');
      os << '"' << s << '"';
    } else if (v.is_boolean()) {
      os << (v.get<bool>() ? "true" : "false");
    } else if (v.is_number_integer()) {
      os << v.get<long long>();
    } else if (v.is_null()) {
      os << "nan";
    } else {
      os << format_double(v.get<double>());
    }
  }
  return os.str();
}

SweepRow compute_row(const ExperimentConfig& config, const OneBodyModel& model, int n, double beta, double epsilon) {
  const auto t0 = std::chrono::steady_clock::now();
  SweepRow row;
  row.n = n;
  row.beta = beta;
  row.epsilon = epsilon;
  row.modes = config.modes;
  const std::uint64_t seed = derive_seed(config.seed, n, beta, epsilon);
  const InteractionPotential w = config.potential();
  const InteractionPotential wn = w.scaled(n, beta);
  const int m = config.modes;

  const MatrixXc h = one_body_matrix(model, m);
  const TwoBodyTensor tensor = build_two_body_tensor(model, wn, m);
  const TwoBodyTensor tensor_eps = build_two_body_tensor(model, wn.modified(epsilon), m);
  row.tensor_symmetry_defect = tensor.symmetry_defect();

  const FockHamiltonian hn(n, h, tensor);
  LanczosOptions lo;
  lo.tolerance = config.lanczos_tolerance;
  lo.krylov = config.lanczos_krylov;
  lo.seed = seed;
  const GroundStateResult gs = ground_state(hn, lo);
  row.e_many = gs.energy / n;
  row.residual = gs.residual;
  row.matvecs = gs.matvecs;
  row.converged = gs.converged;
  const VectorXc psi = gs.vector.normalized();

  const auto hc = minimize_hartree_coefficients(h, tensor, 4, seed);
  row.e_hartree_modes = hc.energy;
  row.e_hartree_eps_modes = minimize_hartree_coefficients(h, tensor_eps, 4, seed).energy;
  row.variational_gap = row.e_hartree_modes - row.e_many;
  row.variational_ok = row.variational_gap > -1e-10;

  const FockSector& sector = hn.sector();
  const MatrixXc g1 = reduced_density_matrix(sector, psi, 1);
  const MatrixXc g2 = n >= 2 ? reduced_density_matrix(sector, psi, 2) : MatrixXc();
  if (n >= 2) row.identity_defect = energy_identity_check(hn, psi, h, tensor, g2).relative;

  row.cutoff = config.cutoff(n, beta, epsilon);
  const auto split = spectral_split(model, row.cutoff);
  row.cutoff = split.cutoff;
  row.n_low = std::min(split.n_low, m);
  if (row.n_low >= 1) {
    const auto rc = check_localization(sector, psi, row.n_low, g1, g2);
    row.localization_n1 = rc.defect_n1;
    row.localization_n2 = rc.defect_n2;
    row.normalization_minus = rc.normalization_minus;
    row.normalization_plus = rc.normalization_plus;
    if (n >= 2) {
      const auto lg = localized_definetti_gap(sector, psi, row.n_low, 2);
      row.definetti_distance = lg.distance;
      row.definetti_bound = lg.bound;
      row.mass_deficit = lg.mass_deficit;
      row.deficit_bound = lg.deficit_bound;
    }
  }

  // mean-field minimizers on the grid; the condensate reference is the NLS
  // minimizer for beta > 0 and the Hartree minimizer for beta = 0
  VectorXc reference = hc.c;
  if (config.meanfield) {
    MinimizeOptions mo;
    mo.starts = config.meanfield_starts;
    mo.seed = seed;
    const auto problem = MeanFieldProblem::scaled(model, w, n, beta, epsilon);
    const auto rh = minimize(problem, Functional::Hartree, mo);
    row.e_hartree = rh.energy;
    row.e_hartree_eps = minimize(problem, Functional::HartreeEps, mo).energy;
    VectorXc u = rh.u;
    try {
      const auto nls = minimize(MeanFieldProblem::contact(model, w.integral()), Functional::NLS, mo);
      row.e_nls = nls.energy;
      if (beta > 0.0) u = nls.u;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Unstable) throw;
      row.e_nls = std::numeric_limits<double>::quiet_NaN();
    }
    reference = VectorXc(m);
    for (int i = 0; i < m; ++i) reference[i] = model.grid().inner(model.eigenvectors().col(i), u);
  } else {
    row.e_hartree = row.e_hartree_eps = row.e_nls = std::numeric_limits<double>::quiet_NaN();
  }
  if (n >= 2) {
    const auto cd = condensation_diagnostics(g1, g2, reference);
    row.lambda_max = cd.lambda_max;
    row.overlap = cd.overlap;
    row.condensate_distance = cd.distance;
  } else {
    const Eigen::SelfAdjointEigenSolver<MatrixXc> es(g1, Eigen::EigenvaluesOnly);
    row.lambda_max = es.eigenvalues()[m - 1];
  }
  row.depletion = 1.0 - row.lambda_max;
  row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

// ---------------------------------------------------------------------------
// Bounds
// ---------------------------------------------------------------------------

nlohmann::json BoundCheck::to_json() const {
  nlohmann::json rj = nlohmann::json::array();
  for (const auto& r : rows) rj.push_back({{"n", r.n}, {"lhs", r.lhs}, {"rhs", r.rhs}, {"pass", r.pass}});
  return {{"name", name},         {"statement", statement}, {"status", status}, {"reason", reason},
          {"beta", beta},         {"epsilon", epsilon},     {"constant", constant},
          {"exponent", exponent}, {"rows", rj}};
}

namespace {

constexpr double kBoundSlack = 1e-9;

// C from the smallest N (negative values clip to 0), then lhs <= C rate at every N.
void calibrate(BoundCheck& b, const std::vector<const SweepRow*>& rows,
               const std::function<double(const SweepRow&)>& lhs, const std::function<double(int)>& rate) {
  if (rows.empty()) {
    b.status = "OUT-OF-REGIME";
    b.reason = "no completed rows";
    return;
  }
  b.constant = std::max(lhs(*rows.front()) / rate(rows.front()->n), 0.0);
  for (const auto* r : rows) {
    const double l = lhs(*r), rhs = b.constant * rate(r->n);
    const bool ok = l <= rhs + kBoundSlack;
    b.rows.push_back({r->n, l, rhs, ok});
    if (!ok) b.status = "FAIL";
  }
}

std::string fraction_text(const Rational& r) { return r.str(); }

}  // namespace

std::vector<BoundCheck> check_energy_bounds(const ExperimentConfig& config, const std::vector<SweepRow>& rows) {
  std::vector<BoundCheck> out;
  const int d = config.trap.dim;
  const double s = config.trap.s();
  const double ds = std::isinf(s) ? 0.0 : d / s;
  const int s_int = std::isinf(s) ? 0 : static_cast<int>(std::lround(s));
  const bool s_integer = std::isinf(s) || std::abs(s - s_int) < 1e-12;
  const InteractionPotential w = config.potential();

  std::set<std::pair<double, double>> groups;
  for (const auto& r : rows) groups.insert({r.beta, r.epsilon});
  for (const auto& [beta, eps] : groups) {
    std::vector<const SweepRow*> sel;
    for (const auto& r : rows)
      if (r.beta == beta && r.epsilon == eps && r.status == "ok") sel.push_back(&r);
    std::sort(sel.begin(), sel.end(), [](auto* a, auto* b) { return a->n < b->n; });
    auto make = [&](const std::string& name, const std::string& statement) {
      BoundCheck b;
      b.name = name;
      b.statement = statement;
      b.beta = beta;
      b.epsilon = eps;
      return b;
    };

    {
      BoundCheck b = make("variational_upper", "E(N)/N <= e_H (mode span), asserted exactly");
      for (const auto* r : sel) {
        const bool ok = r->e_many <= r->e_hartree_modes + 1e-10;
        b.rows.push_back({r->n, r->e_many, r->e_hartree_modes, ok});
        if (!ok) b.status = "FAIL";
      }
      out.push_back(b);
    }

    const double thr_strict = 1.0 / (d * (1.0 + ds + d / 2.0));
    const double thr_worse = 1.0 / (d * (2.0 + ds + d / 2.0));
    if (d == 1 && beta > 0.0) {
      const double p = 1.0 / (4.0 + (std::isinf(s) ? 0.0 : 2.0 / s));
      BoundCheck b = make("lower_1d", "e_H - E(N)/N <= C N^-(1/(4+2/s))");
      b.exponent = -p;
      calibrate(b, sel, [](const SweepRow& r) { return r.e_hartree_modes - r.e_many; },
                [p](int n) { return std::pow(n, -p); });
      out.push_back(b);
    } else {
      BoundCheck b = make("lower_eps", "e_H^eps - E(N)/N <= C eps^-(1+d/2+d/s) N^-(1-d beta(1+d/2+d/s))");
      const double q = 1.0 - d * beta * (1.0 + d / 2.0 + ds);
      b.exponent = -q;
      if (d >= 2 && !(beta < thr_strict)) {
        b.status = "OUT-OF-REGIME";
        b.reason = "beta >= 1/(d(1+d/s+d/2)) = " + format_double(thr_strict);
      } else {
        const double pre = std::pow(eps, -1.0 - d / 2.0 - ds);
        calibrate(b, sel, [](const SweepRow& r) { return r.e_hartree_eps_modes - r.e_many; },
                  [pre, q](int n) { return pre * std::pow(n, -q); });
      }
      out.push_back(b);
    }

    if (beta == 0.0) {
      const double p = 1.0 / (2.0 + d / 2.0 + ds);
      BoundCheck b = make("hartree_rate", "e_H - E(N)/N <= C N^-(1/(2+d/2+d/s))");
      if (s_integer) b.statement += " with exponent " + fraction_text(hartree_rate_exponent(d, s_int));
      b.exponent = -p;
      calibrate(b, sel, [](const SweepRow& r) { return r.e_hartree_modes - r.e_many; },
                [p](int n) { return std::pow(n, -p); });
      out.push_back(b);
    } else if (d >= 2) {
      const double p = 1.0 / (2.0 + ds + d / 2.0);
      BoundCheck b = make("hartree_rate", "e_H - E(N)/N <= C N^(d beta - 1/(2+d/s+d/2))");
      b.exponent = d * beta - p;
      if (!(beta < thr_worse)) {
        b.status = "OUT-OF-REGIME";
        b.reason = "beta >= 1/(d(2+d/s+d/2)) = " + format_double(thr_worse);
      } else {
        calibrate(b, sel, [](const SweepRow& r) { return r.e_hartree_modes - r.e_many; },
                  [&](int n) { return std::pow(n, d * beta - p); });
      }
      out.push_back(b);
    }

    if (beta > 0.0) {
      BoundCheck up = make("nls_upper", "E(N)/N - e_NLS <= C N^-beta");
      BoundCheck lo = make("nls_lower", "e_NLS - E(N)/N <= C (N^-beta + N^-(1/(4+2/s)))");
      std::string reason;
      if (!config.meanfield) reason = "mean-field minimization disabled in this sweep";
      else if (d == 2 && !(w.negative_integral() < townes_reference().mass))
        reason = "Hartree stability of w not certified (int w^- >= a*)";
      else if (d == 2 && !(beta < thr_strict))
        reason = "beta >= 1/(d(1+d/s+d/2)) = " + format_double(thr_strict);
      else if (d >= 3) reason = "no many-body grids in 3D";
      if (!reason.empty()) {
        up.status = lo.status = "OUT-OF-REGIME";
        up.reason = lo.reason = reason;
      } else {
        const double p1 = d == 1 ? 1.0 / (4.0 + (std::isinf(s) ? 0.0 : 2.0 / s))
                                 : (1.0 - d * beta * (1.0 + d / 2.0 + ds)) / (2.0 + ds + d / 2.0);
        up.exponent = -beta;
        lo.exponent = -std::min(beta, p1);
        calibrate(up, sel, [](const SweepRow& r) { return r.e_many - r.e_nls; },
                  [beta](int n) { return std::pow(n, -beta); });
        calibrate(lo, sel, [](const SweepRow& r) { return r.e_nls - r.e_many; },
                  [beta, p1](int n) { return std::pow(n, -beta) + std::pow(n, -p1); });
      }
      out.push_back(up);
      out.push_back(lo);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sweep driver
// ---------------------------------------------------------------------------

nlohmann::json SweepResult::to_json() const {
  nlohmann::json rj = nlohmann::json::array(), bj = nlohmann::json::array(), fj = nlohmann::json::array();
  for (const auto& r : rows) rj.push_back(r.to_json());
  for (const auto& b : bounds) bj.push_back(b.to_json());
  for (const auto& f : fits) {
    nlohmann::json x = {{"quantity", f.quantity},       {"beta", f.beta},           {"epsilon", f.epsilon},
                        {"exact_zero", f.fit.exact_zero}, {"slope", f.fit.slope},     {"intercept", f.fit.intercept},
                        {"half_width", f.fit.half_width}, {"points", f.fit.points},   {"excluded_zeros", f.fit.excluded_zeros}};
    x["theory_exponent"] = f.theory ? nlohmann::json(*f.theory) : nlohmann::json(nullptr);
    fj.push_back(x);
  }
  return {{"config", config.to_json()}, {"rows", rj}, {"bounds", bj}, {"fits", fj}, {"pass", pass}};
}

namespace {

std::string fingerprint(const nlohmann::json& j) {
  const std::string s = j.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) h = (h ^ c) * 1099511628211ULL;
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

SweepResult run_sweep(const ExperimentConfig& config, const SweepOptions& opt) {
  SweepResult res;
  res.config = config;
  const std::string fp = fingerprint(config.to_json());
  std::map<std::string, SweepRow> done;
  std::string rows_path;
  if (!opt.output_dir.empty()) {
    ensure_directory(opt.output_dir);
    rows_path = (std::filesystem::path(opt.output_dir) / "rows.jsonl").string();
    for (const auto& line : read_lines(rows_path)) {
      try {
        const auto j = nlohmann::json::parse(line);
        if (j.at("config").get<std::string>() != fp) continue;
        const SweepRow r = SweepRow::from_json(j.at("row"));
        done[r.key()] = r;
      } catch (const std::exception&) {
        // a partially written last line from an interrupted run
      }
    }
  }

  struct Job {
    int n;
    double beta, eps;
  };
  std::vector<Job> jobs;
  for (double beta : config.betas)
    for (double eps : config.epsilons)
      for (int n : config.ns) jobs.push_back({n, beta, eps});

  std::vector<SweepRow> rows(jobs.size());
  std::vector<bool> have(jobs.size(), false);
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    SweepRow probe;
    probe.n = jobs[i].n;
    probe.beta = jobs[i].beta;
    probe.epsilon = jobs[i].eps;
    const auto it = done.find(probe.key());
    if (it != done.end()) {
      rows[i] = it->second;
      have[i] = true;
      ++res.resumed_rows;
    }
  }

  const bool pending = std::find(have.begin(), have.end(), false) != have.end();
  std::optional<OneBodyModel> model;
  std::string model_error;
  if (pending) {
    try {
      model.emplace(build_one_body(config.trap, config.grid));
    } catch (const std::exception& e) {
      model_error = e.what();
    }
  }

  std::mutex mu;
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      if (have[i]) continue;
      SweepRow r;
      r.n = jobs[i].n;
      r.beta = jobs[i].beta;
      r.epsilon = jobs[i].eps;
      r.modes = config.modes;
      try {
        if (!model) throw Error(ErrorCode::InvalidArgument, model_error);
        r = compute_row(config, *model, jobs[i].n, jobs[i].beta, jobs[i].eps);
      } catch (const std::exception& e) {
        r.status = "error";
        r.error = e.what();
      }
      std::lock_guard<std::mutex> lock(mu);
      rows[i] = r;
      if (!rows_path.empty()) append_line(rows_path, nlohmann::json{{"config", fp}, {"row", r.to_json()}}.dump());
      if (!opt.quiet) {
        std::fprintf(stderr, "[%s] %s  E/N=%.10g  gap=%.3e  %.1fs%s%s\n", config.name.c_str(), r.key().c_str(),
                     r.e_many, r.variational_gap, r.seconds, r.status == "ok" ? "" : "  ERROR: ",
                     r.status == "ok" ? "" : r.error.c_str());
      }
    }
  };
  const int workers = std::max(1, std::min<int>(opt.jobs, static_cast<int>(jobs.size())));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < workers; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  res.rows = std::move(rows);
  res.bounds = check_energy_bounds(config, res.rows);

  const int d = config.trap.dim;
  const double s = config.trap.s();
  const double ds = std::isinf(s) ? 0.0 : d / s;
  std::set<std::pair<double, double>> groups;
  for (const auto& r : res.rows) groups.insert({r.beta, r.epsilon});
  for (const auto& [beta, eps] : groups) {
    std::vector<double> x, y;
    for (const auto& r : res.rows)
      if (r.beta == beta && r.epsilon == eps && r.status == "ok") {
        // gaps at rounding level count as exact zeros
        const double floor = 1e-12 * (1.0 + std::abs(r.e_many));
        x.push_back(r.n);
        y.push_back(r.variational_gap > floor ? r.variational_gap : 0.0);
      }
    RateSummary rs;
    rs.quantity = "variational_gap";
    rs.beta = beta;
    rs.epsilon = eps;
    if (beta == 0.0) rs.theory = -1.0 / (2.0 + d / 2.0 + ds);
    else if (d == 1) rs.theory = -1.0 / (4.0 + (std::isinf(s) ? 0.0 : 2.0 / s));
    try {
      rs.fit = fit_rate(x, y);
    } catch (const Error&) {
      rs.fit.points = 0;  // too few usable points; recorded without a slope
    }
    res.fits.push_back(rs);
  }

  res.pass = true;
  for (const auto& r : res.rows)
    if (r.status != "ok" || !r.variational_ok || r.identity_defect > 1e-9 || r.localization_n1 > 1e-10 ||
        r.localization_n2 > 1e-10 || r.normalization_minus > 1e-12 || r.normalization_plus > 1e-12)
      res.pass = false;
  for (const auto& b : res.bounds)
    if (b.status == "FAIL") res.pass = false;
  return res;
}

void write_sweep_outputs(const SweepResult& result, const std::string& dir) {
  ensure_directory(dir);
  std::ostringstream csv;
  bool first = true;
  for (const auto& c : sweep_columns()) {
    csv << (first ? "" : ",") << c;
    first = false;
  }
  csv << '\n';
  for (const auto& r : result.rows) csv << sweep_csv_line(r) << '\n';
  write_text((std::filesystem::path(dir) / "results.csv").string(), csv.str());
  write_json((std::filesystem::path(dir) / "report.json").string(), result.to_json());

  std::set<std::pair<double, double>> groups;
  for (const auto& r : result.rows) groups.insert({r.beta, r.epsilon});
  std::vector<PlotSeries> gaps, depl, finetti;
  for (const auto& [beta, eps] : groups) {
    const std::string tag = "beta=" + format_double(beta) + " eps=" + format_double(eps);
    PlotSeries g{"e_H - E(N)/N, " + tag, {}, {}}, dp{"1 - lambda_max, " + tag, {}, {}},
        df{"localized de Finetti distance, " + tag, {}, {}}, db{"8 N_L / N, " + tag, {}, {}};
    for (const auto& r : result.rows) {
      if (r.beta != beta || r.epsilon != eps || r.status != "ok") continue;
      g.x.push_back(r.n);
      g.y.push_back(r.variational_gap);
      dp.x.push_back(r.n);
      dp.y.push_back(r.depletion);
      df.x.push_back(r.n);
      df.y.push_back(r.definetti_distance);
      db.x.push_back(r.n);
      db.y.push_back(r.definetti_bound);
    }
    gaps.push_back(g);
    depl.push_back(dp);
    finetti.push_back(df);
    finetti.push_back(db);
  }
  for (const auto& b : result.bounds) {
    if (b.rows.empty() || b.name == "variational_upper" || b.constant <= 0.0) continue;
    PlotSeries p{b.name + " calibrated bound (beta=" + format_double(b.beta) + ")", {}, {}};
    for (const auto& r : b.rows) {
      p.x.push_back(r.n);
      p.y.push_back(r.rhs);
    }
    gaps.push_back(p);
  }
  const auto plots = std::filesystem::path(dir) / "plots";
  write_text((plots / "variational_gap.svg").string(),
             svg_loglog(result.config.name + ": variational gap", "N", "energy per particle", gaps));
  write_text((plots / "depletion.svg").string(), svg_loglog(result.config.name + ": depletion", "N", "1 - lambda_max", depl));
  write_text((plots / "definetti.svg").string(),
             svg_loglog(result.config.name + ": localized de Finetti", "N", "trace distance", finetti));
}

}  // namespace mflab
