// mflab: command line entry point.
//
// Exit codes: 0 success, 2 an asserted inequality failed, 1 operational error.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mflab/config.hpp"
#include "mflab/experiments.hpp"
#include "mflab/fockloc.hpp"
#include "mflab/interaction.hpp"
#include "mflab/io.hpp"
#include "mflab/manybody.hpp"
#include "mflab/meanfield.hpp"
#include "mflab/onebody.hpp"
#include "mflab/tables.hpp"

using namespace mflab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Globals {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  bool quiet = false;
};

struct AssertionFailure {
  std::string what;
};

json load_config(const std::string& path) {
  if (path.empty()) throw Error(ErrorCode::Config, "--config is required for this subcommand");
  json j = read_json_file(path);
  // a manifest written by an earlier run replays its resolved config
  if (j.is_object() && j.contains("subcommand") && j.contains("config") && j.contains("manifest_version"))
    return j.at("config");
  return j;
}

std::string output_dir(const Globals& g, const std::string& sub) {
  if (!g.out.empty()) return g.out;
  const char* root = std::getenv("MEANFIELD_LAB_OUT");
  return (fs::path(root && *root ? root : "mflab-out") / sub).string();
}

void write_manifest(const std::string& dir, const std::string& sub, const json& resolved, std::uint64_t seed) {
  write_json((fs::path(dir) / "manifest.json").string(),
             {{"manifest_version", 1}, {"subcommand", sub}, {"seed", seed}, {"config", resolved}});
}

void say(const Globals& g, const std::string& line) {
  if (!g.quiet) std::cout << line << '\n';
}

std::uint64_t read_seed(const json& j, SchemaChecker& sc) {
  if (!j.contains("seed")) return 1;
  if (!j.at("seed").is_number_unsigned()) {
    sc.fail("seed", "expected a non-negative integer");
    return 1;
  }
  return j.at("seed").get<std::uint64_t>();
}

// ---------------------------------------------------------------------------

int cmd_onebody(const Globals& g) {
  const json j = load_config(g.config);
  SchemaChecker sc;
  sc.object(j, "", {"trap", "grid", "cutoffs", "seed"});
  TrapConfig trap;
  GridSpec grid;
  if (sc.require(j, "", "trap")) trap = parse_trap(j.at("trap"), "trap", sc);
  if (j.contains("grid")) grid = parse_grid(j.at("grid"), "grid", sc);
  std::vector<double> cutoffs;
  if (j.contains("cutoffs")) cutoffs = sc.numbers(j, "", "cutoffs");
  const std::uint64_t seed = g.seed.value_or(read_seed(j, sc));
  sc.finish();

  const std::string dir = output_dir(g, "onebody");
  ensure_directory(dir);
  json resolved = {{"trap", trap.to_json()}, {"grid", grid_to_json(grid)}, {"cutoffs", cutoffs}, {"seed", seed}};
  write_manifest(dir, "onebody", resolved, seed);

  const OneBodyModel model = build_one_body(trap, grid);
  std::string csv = "index,eigenvalue\n";
  const auto& ev = model.eigenvalues();
  const int shown = std::min<int>(static_cast<int>(ev.size()), std::max(grid.modes, model.modes()));
  for (int i = 0; i < shown; ++i) csv += std::to_string(i) + "," + format_double(ev[i]) + "\n";
  write_text((fs::path(dir) / "eigenpairs.csv").string(), csv);

  json report = {{"modes", model.modes()},
                 {"analytic", model.analytic()},
                 {"hermiticity_defect", model.hermiticity_defect()},
                 {"boundary_leakage", model.boundary_leakage()},
                 {"richardson_shift", model.eigenvalue_shift_from_richardson()}};
  bool ok = true;
  if (!cutoffs.empty()) {
    const WeylReport w = verify_weyl_bound(model, cutoffs);
    json rows = json::array();
    for (const auto& r : w.rows) rows.push_back({{"cutoff", r.cutoff}, {"count", r.count}, {"ratio", r.ratio}});
    report["weyl"] = {{"exponent", w.exponent}, {"rows", rows},     {"max_ratio", w.max_ratio},
                      {"tail_max_ratio", w.tail_max_ratio}, {"bounded", w.bounded}};
    ok = w.bounded;
  }
  write_json((fs::path(dir) / "onebody.json").string(), report);
  say(g, "lambda_0 = " + format_double(ev[0]));
  if (!ok) throw AssertionFailure{"Weyl count ratio is not bounded over the requested cutoffs"};
  return 0;
}

int cmd_stability(const Globals& g) {
  const json j = load_config(g.config);
  SchemaChecker sc;
  sc.object(j, "", {"dimension", "interaction", "margin", "seed"});
  const int d = sc.integer(j, "", "dimension", 2);
  if (d < 1 || d > 3) sc.fail("dimension", "must be 1, 2 or 3");
  json wj;
  if (sc.require(j, "", "interaction")) wj = check_interaction(j.at("interaction"), "interaction", sc);
  const bool margin = sc.boolean(j, "", "margin", true);
  const std::uint64_t seed = g.seed.value_or(read_seed(j, sc));
  sc.finish();
  const InteractionPotential w = InteractionPotential::from_json(d, wj);

  const std::string dir = output_dir(g, "stability");
  ensure_directory(dir);
  write_manifest(dir, "stability", {{"dimension", d}, {"interaction", wj}, {"margin", margin}, {"seed", seed}},
                 seed);

  StabilityReport rep;
  if (d == 2) {
    const TownesProfile& q = townes_reference();
    rep.a_star = q.mass;
    if (q.mass_history.size() >= 2)
      rep.a_star_error = std::abs(q.mass_history.back() - q.mass_history[q.mass_history.size() - 2]);
    HartreeStabilityOptions ho;
    ho.seed = seed;
    rep.hartree = check_hartree_stability_2d(w, ho, q);
    if (margin) rep.margin = stability_margin(w, MarginOptions{}, &q);
  } else {
    ClassicalStabilityOptions co;
    co.seed = seed;
    rep.classical = check_classical_stability(w, co);
    if (margin && d == 3) rep.margin = stability_margin(w, MarginOptions{}, nullptr);
  }
  write_json((fs::path(dir) / "stability.json").string(), to_json(rep));
  if (rep.hartree) say(g, std::string("Hartree stability: ") + to_string(rep.hartree->verdict));
  if (rep.classical) say(g, std::string("classical stability: ") + to_string(rep.classical->verdict));
  return 0;
}

int cmd_meanfield(const Globals& g) {
  const json j = load_config(g.config);
  SchemaChecker sc;
  sc.object(j, "", {"trap", "grid", "interaction", "n", "beta", "epsilon", "functionals", "starts", "seed"});
  TrapConfig trap;
  GridSpec grid;
  json wj;
  if (sc.require(j, "", "trap")) trap = parse_trap(j.at("trap"), "trap", sc);
  if (j.contains("grid")) grid = parse_grid(j.at("grid"), "grid", sc);
  if (sc.require(j, "", "interaction")) wj = check_interaction(j.at("interaction"), "interaction", sc);
  const double n = sc.number(j, "", "n", 1.0);
  const double beta = sc.number(j, "", "beta", 0.0);
  const double eps = sc.number(j, "", "epsilon", 0.5);
  const int starts = sc.integer(j, "", "starts", 2);
  std::vector<std::string> names = {"hartree", "nls"};
  if (j.contains("functionals")) {
    names.clear();
    const auto& f = j.at("functionals");
    if (!f.is_array()) sc.fail("functionals", "expected a list of names");
    else
      for (std::size_t i = 0; i < f.size(); ++i) {
        const std::string s = f[i].is_string() ? f[i].get<std::string>() : "";
        if (s != "hartree" && s != "hartree_eps" && s != "nls")
          sc.fail("functionals[" + std::to_string(i) + "]", "expected hartree, hartree_eps or nls");
        else names.push_back(s);
      }
  }
  if (!(n >= 1.0)) sc.fail("n", "must be at least 1");
  if (!(beta >= 0.0 && beta < 1.0)) sc.fail("beta", "must lie in [0, 1)");
  if (!(eps > 0.0 && eps <= 1.0)) sc.fail("epsilon", "must lie in (0, 1]");
  const std::uint64_t seed = g.seed.value_or(read_seed(j, sc));
  sc.finish();

  const std::string dir = output_dir(g, "meanfield");
  ensure_directory(dir);
  write_manifest(dir, "meanfield",
                 {{"trap", trap.to_json()}, {"grid", grid_to_json(grid)}, {"interaction", wj}, {"n", n},
                  {"beta", beta}, {"epsilon", eps}, {"functionals", names}, {"starts", starts}, {"seed", seed}},
                 seed);

  const OneBodyModel model = build_one_body(trap, grid);
  const InteractionPotential w = InteractionPotential::from_json(trap.dim, wj);
  const auto scaled = MeanFieldProblem::scaled(model, w, n, beta, eps);
  const auto contact = MeanFieldProblem::contact(model, w.integral());
  MinimizeOptions mo;
  mo.starts = starts;
  mo.seed = seed;
  json out = json::object();
  for (const auto& name : names) {
    const Functional f = name == "hartree" ? Functional::Hartree
                         : name == "hartree_eps" ? Functional::HartreeEps
                                                 : Functional::NLS;
    const MeanFieldProblem& p = f == Functional::NLS ? contact : scaled;
    try {
      const auto r = minimize(p, f, mo);
      out[name] = to_json(r, p, f);
      write_complex_vector((fs::path(dir) / (name + "_minimizer.bin")).string(), r.u,
                           {{"functional", name}, {"energy", r.energy}, {"points", model.grid().points},
                            {"dimension", model.dim()}});
      say(g, name + " energy = " + format_double(r.energy));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Unstable) throw;
      out[name] = {{"unstable", true}, {"message", e.what()}};
      say(g, name + ": unstable (" + std::string(e.what()) + ")");
    }
  }
  write_json((fs::path(dir) / "meanfield.json").string(), out);
  return 0;
}

int cmd_manybody(const Globals& g) {
  json j = load_config(g.config);
  if (g.seed && j.is_object()) j["seed"] = *g.seed;
  const ExperimentConfig c = ExperimentConfig::from_json(j);
  const std::string dir = output_dir(g, "manybody");
  ensure_directory(dir);
  write_manifest(dir, "manybody", c.to_json(), c.seed);
  const OneBodyModel model = build_one_body(c.trap, c.grid);
  json rows = json::array();
  bool ok = true;
  std::string failure;
  for (double beta : c.betas)
    for (double eps : c.epsilons)
      for (int n : c.ns) {
        const SweepRow r = compute_row(c, model, n, beta, eps);
        rows.push_back(r.to_json());
        say(g, r.key() + "  E/N = " + format_double(r.e_many) + "  e_H(M) = " + format_double(r.e_hartree_modes));
        if (!r.variational_ok) {
          ok = false;
          failure = r.key() + ": E(N)/N = " + format_double(r.e_many) + " > e_H(M) = " + format_double(r.e_hartree_modes);
        }
      }
  write_json((fs::path(dir) / "manybody.json").string(), {{"rows", rows}});
  if (!ok) throw AssertionFailure{failure};
  return 0;
}

int cmd_definetti(const Globals& g, int dim, int n, int k, int states, int mc_samples) {
  if (dim < 1 || n < 1 || k < 1 || k > n || states < 1 || mc_samples < 0)
    throw Error(ErrorCode::InvalidArgument, "definetti: need dim >= 1, 1 <= k <= N, samples >= 1");
  const std::uint64_t seed = g.seed.value_or(1);
  const std::string dir = output_dir(g, "definetti");
  ensure_directory(dir);
  write_manifest(dir, "definetti",
                 {{"dim", dim}, {"N", n}, {"k", k}, {"samples", states}, {"monte_carlo", mc_samples}, {"seed", seed}},
                 seed);
  const FockSector sector(n, dim);
  json cases = json::array();
  double worst = 0.0, bound = 0.0;
  for (int i = 0; i < states; ++i) {
    const VectorXc psi = haar_state(sector.dimension(), seed * 1000003ULL + static_cast<std::uint64_t>(i));
    const CkmrResult r = ckmr_certify(sector, psi, k);
    worst = std::max(worst, r.distance);
    bound = r.bound;
    json cj = r.to_json();
    if (mc_samples > 0 && i == 0) {
      const MatrixXc gn = psi * psi.adjoint();
      const MatrixXc exact = definetti_moment(gn, n, k, dim);
      const auto mc = haar_moment(gn, n, k, dim, mc_samples, seed);
      double z = 0.0;
      for (Eigen::Index a = 0; a < exact.rows(); ++a)
        for (Eigen::Index b = 0; b < exact.cols(); ++b) {
          const cplx dlt = mc.mean(a, b) - exact(a, b);
          // entries that vanish identically carry rounding noise only
          z = std::max(z, std::abs(dlt.real()) / std::max(mc.stderr_re(a, b), 1e-12));
          z = std::max(z, std::abs(dlt.imag()) / std::max(mc.stderr_im(a, b), 1e-12));
        }
      cj["monte_carlo_max_sigma"] = z;
    }
    cases.push_back(cj);
  }
  write_json((fs::path(dir) / "definetti.json").string(),
             {{"dim", dim}, {"N", n}, {"k", k}, {"bound", bound}, {"max_distance", worst}, {"cases", cases}});
  std::cout << "bound 4*k*dim/N = " << format_double(bound) << '\n';
  std::cout << "max distance    = " << format_double(worst) << '\n';
  if (worst > bound) throw AssertionFailure{"trace distance " + format_double(worst) + " exceeds " + format_double(bound)};
  return 0;
}

int cmd_sweep(const Globals& g) {
  json j = load_config(g.config);
  if (g.seed && j.is_object()) j["seed"] = *g.seed;
  const ExperimentConfig c = ExperimentConfig::from_json(j);
  const std::string dir = output_dir(g, "sweep");
  ensure_directory(dir);
  write_manifest(dir, "sweep", c.to_json(), c.seed);
  SweepOptions so;
  so.output_dir = dir;
  so.jobs = g.jobs;
  so.quiet = g.quiet;
  const SweepResult r = run_sweep(c, so);
  write_sweep_outputs(r, dir);
  say(g, "rows: " + std::to_string(r.rows.size()) + " (" + std::to_string(r.resumed_rows) + " resumed)");
  std::string failure;
  for (const auto& b : r.bounds) {
    say(g, b.name + " beta=" + format_double(b.beta) + " eps=" + format_double(b.epsilon) + ": " + b.status +
               (b.reason.empty() ? "" : " (" + b.reason + ")"));
    if (b.status == "FAIL")
      for (const auto& row : b.rows)
        if (!row.pass && failure.empty())
          failure = b.name + " at N=" + std::to_string(row.n) + ": " + format_double(row.lhs) + " > " +
                    format_double(row.rhs) + "  [" + b.statement + "]";
  }
  for (const auto& row : r.rows)
    if (failure.empty() && row.status != "ok") failure = row.key() + ": " + row.error;
  if (!r.pass) throw AssertionFailure{failure.empty() ? "a row check failed; see report.json" : failure};
  return 0;
}

int cmd_report(const Globals& g) {
  const json j = load_config(g.config);
  SchemaChecker sc;
  sc.object(j, "", {"sweeps"});
  std::vector<std::string> dirs;
  if (j.contains("sweeps")) {
    if (!j.at("sweeps").is_array()) sc.fail("sweeps", "expected a list of sweep output directories");
    else
      for (const auto& s : j.at("sweeps")) {
        if (s.is_string()) dirs.push_back(s.get<std::string>());
        else sc.fail("sweeps", "entries must be strings");
      }
  }
  sc.finish();
  const std::string dir = output_dir(g, "report");
  ensure_directory(dir);
  write_manifest(dir, "report", {{"sweeps", dirs}}, g.seed.value_or(1));

  MeasuredSlopes measured;
  for (const auto& d : dirs) {
    const json rep = read_json_file((fs::path(d) / "report.json").string());
    const auto cfg = ExperimentConfig::from_json(rep.at("config"));
    const double s = cfg.trap.s();
    const int s_int = std::isinf(s) ? 0 : static_cast<int>(std::lround(s));
    for (const auto& f : rep.at("fits")) {
      if (f.at("beta").get<double>() != 0.0 || f.at("points").get<int>() < 4) continue;
      RateFit rf;
      rf.slope = f.at("slope").get<double>();
      rf.half_width = f.at("half_width").get<double>();
      rf.points = f.at("points").get<int>();
      measured[{cfg.trap.dim, s_int}] = rf;
    }
  }
  const std::string md = "# Convergence exponents\n\n" + render_table1(measured) + "\n# Stability thresholds\n\n" + render_table2();
  write_text((fs::path(dir) / "tables.md").string(), md);
  write_json((fs::path(dir) / "tables.json").string(), tables_json(measured));
  say(g, md);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mflab: mean-field limits of trapped bosons"};
  app.require_subcommand(1);
  Globals g;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "global seed");
  app.add_option("--config", g.config, "JSON config file (or a manifest.json from an earlier run)");
  app.add_option("--out", g.out, "output directory (default $MEANFIELD_LAB_OUT/<subcommand>)");
  app.add_option("--jobs", g.jobs, "concurrent sweep rows")->check(CLI::PositiveNumber);
  app.add_flag("--quiet", g.quiet, "suppress progress output");
  app.fallthrough();

  int dim = 2, n = 10, k = 2, states = 50, mc = 0;
  auto* s_one = app.add_subcommand("onebody", "eigenpairs of the trap, optional Weyl check");
  auto* s_stab = app.add_subcommand("stability", "classical / Hartree stability and the margin eta");
  auto* s_mf = app.add_subcommand("meanfield", "Hartree, modified Hartree and NLS minimizers");
  auto* s_mb = app.add_subcommand("manybody", "exact ground states without persistence");
  auto* s_df = app.add_subcommand("definetti", "finite-dimensional de Finetti certificate on Haar states");
  s_df->add_option("--dim", dim, "one-body dimension")->required();
  s_df->add_option("--N", n, "particles")->required();
  s_df->add_option("--k", k, "marginal order")->required();
  s_df->add_option("--samples", states, "number of Haar-random states");
  s_df->add_option("--monte-carlo", mc, "Monte Carlo samples for the moment check on the first state");
  auto* s_sw = app.add_subcommand("sweep", "resumable (N, beta, eps) sweep with bound checks");
  auto* s_rp = app.add_subcommand("report", "render the rate and threshold tables");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  if (seed_opt->count() > 0) g.seed = seed;

  try {
    if (s_one->parsed()) return cmd_onebody(g);
    if (s_stab->parsed()) return cmd_stability(g);
    if (s_mf->parsed()) return cmd_meanfield(g);
    if (s_mb->parsed()) return cmd_manybody(g);
    if (s_df->parsed()) return cmd_definetti(g, dim, n, k, states, mc);
    if (s_sw->parsed()) return cmd_sweep(g);
    if (s_rp->parsed()) return cmd_report(g);
  } catch (const AssertionFailure& f) {
    std::cerr << "assertion failed: " << f.what << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
