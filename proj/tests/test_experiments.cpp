#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mflab/config.hpp"
#include "mflab/experiments.hpp"
#include "mflab/fit.hpp"
#include "mflab/io.hpp"
#include "mflab/tables.hpp"

using namespace mflab;
namespace fs = std::filesystem;

namespace {

nlohmann::json small_config() {
  return nlohmann::json::parse(R"({
    "name": "small",
    "trap": {"dimension": 1, "kind": "harmonic"},
    "grid": {"extent": 8, "points": 96, "modes": 4},
    "interaction": {"profile": "gaussian", "amplitude": 0.5, "width": 1.0},
    "n": [2, 3, 4, 5],
    "beta": [0],
    "modes": 4,
    "seed": 5,
    "meanfield": {"enabled": true, "starts": 1}
  })");
}

std::string config_error(const nlohmann::json& j) {
  try {
    ExperimentConfig::from_json(j);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Config);
    return e.what();
  }
  return "";
}

nlohmann::json without_timing(nlohmann::json j) {
  j.erase("seconds");
  return j;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config round trip and defaults") {
  const auto c = ExperimentConfig::from_json(small_config());
  CHECK(c.ns == std::vector<int>{2, 3, 4, 5});
  CHECK(c.epsilons == std::vector<double>{0.5});
  CHECK(c.cutoff_rule == CutoffRule::Fixed);
  const auto again = ExperimentConfig::from_json(c.to_json());
  CHECK(again.to_json() == c.to_json());
  CHECK(c.cutoff(4, 0.0, 0.5) == doctest::Approx(4.0));
}

TEST_CASE("strict config validation reports every problem") {
  auto j = small_config();
  j["colour"] = "red";
  CHECK(config_error(j).find("colour") != std::string::npos);

  j = small_config();
  j["trap"]["bogus"] = 1;
  j["beta"] = {1.5};
  j["lanczos"] = {{"krylov", 4}};
  const std::string msg = config_error(j);
  CHECK(msg.find("bogus") != std::string::npos);
  CHECK(msg.find("beta[0]") != std::string::npos);
  CHECK(msg.find("krylov") != std::string::npos);

  j = small_config();
  j["n"] = {2, -1};
  CHECK(config_error(j).find("n[1]") != std::string::npos);
  j = small_config();
  j["epsilon"] = {0.0};
  CHECK(config_error(j).find("epsilon[0]") != std::string::npos);
  j = small_config();
  j["interaction"] = {{"profile", "gaussian"}, {"amplitude", 1.0}, {"width", -2.0}};
  CHECK_FALSE(config_error(j).empty());
  j = small_config();
  j["seed"] = -3;
  CHECK(config_error(j).find("seed") != std::string::npos);
  j = small_config();
  j.erase("trap");
  CHECK(config_error(j).find("trap") != std::string::npos);
}

TEST_CASE("lemma cutoff rule") {
  auto j = small_config();
  j["cutoff"] = {{"rule", "lemma"}, {"constant", 2.0}};
  const auto c = ExperimentConfig::from_json(j);
  CHECK(c.cutoff(10, 0.0, 0.5) == doctest::Approx(4.0));
  CHECK(c.cutoff(10, 0.3, 0.5) == doctest::Approx(8.0));
}

TEST_CASE("rate fits") {
  std::vector<double> x{2, 4, 8, 16, 32}, y;
  for (double v : x) y.push_back(3.0 * std::pow(v, -0.5));
  const auto f = fit_rate(x, y);
  CHECK(f.slope == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(std::exp(f.intercept) == doctest::Approx(3.0));
  CHECK(f.half_width < 1e-10);
  CHECK(f.points == 5);

  y[0] = 0.0;
  const auto g = fit_rate(x, y);
  CHECK(g.excluded_zeros == 1);
  CHECK(g.points == 4);
  CHECK(g.slope == doctest::Approx(-0.5));

  CHECK(fit_rate(x, std::vector<double>(5, 0.0)).exact_zero);
  CHECK_THROWS_AS(fit_rate({1, 2, 3}, {1, 2, 3}), Error);
  CHECK_THROWS_AS(fit_rate({1, 2, 3, 4, 5}, {1, 0, 0, 0, 3}), Error);

  const auto [a, b] = linear_fit({0, 1, 2}, {1, 3, 5});
  CHECK(a == doctest::Approx(1.0));
  CHECK(b == doctest::Approx(2.0));
}

TEST_CASE("derived seeds are deterministic and distinct") {
  CHECK(derive_seed(1, 4, 0.2, 0.5) == derive_seed(1, 4, 0.2, 0.5));
  CHECK(derive_seed(1, 4, 0.2, 0.5) != derive_seed(1, 5, 0.2, 0.5));
  CHECK(derive_seed(1, 4, 0.2, 0.5) != derive_seed(2, 4, 0.2, 0.5));
  CHECK(derive_seed(1, 4, 0.2, 0.5) != derive_seed(1, 4, 0.2, 0.25));
}

TEST_CASE("sweep is deterministic, resumable and writes the frozen outputs") {
  const auto c = ExperimentConfig::from_json(small_config());
  const std::string dir = "test-out/sweep";
  fs::remove_all(dir);
  SweepOptions opt;
  opt.output_dir = dir;
  const auto first = run_sweep(c, opt);
  REQUIRE(first.rows.size() == 4);
  CHECK(first.resumed_rows == 0);
  CHECK(first.pass);
  for (const auto& r : first.rows) {
    CHECK(r.status == "ok");
    CHECK(r.variational_ok);
    CHECK(r.identity_defect < 1e-9);
    CHECK(r.localization_n1 < 1e-10);
  }
  write_sweep_outputs(first, dir);
  CHECK(fs::exists(dir + "/results.csv"));
  CHECK(fs::exists(dir + "/report.json"));
  CHECK(fs::exists(dir + "/plots/variational_gap.svg"));
  const auto lines = read_lines(dir + "/results.csv");
  REQUIRE(lines.size() == 5);
  std::string header;
  for (const auto& col : sweep_columns()) header += (header.empty() ? "" : ",") + col;
  CHECK(lines[0] == header);

  const auto resumed = run_sweep(c, opt);
  CHECK(resumed.resumed_rows == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(resumed.rows[i].to_json() == first.rows[i].to_json());

  const auto fresh = run_sweep(c);
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(without_timing(fresh.rows[i].to_json()) == without_timing(first.rows[i].to_json()));

  // a different configuration does not reuse the stored rows
  auto j = small_config();
  j["seed"] = 6;
  CHECK(run_sweep(ExperimentConfig::from_json(j), opt).resumed_rows == 0);
}

TEST_CASE("row JSON round trip keeps NaN as null") {
  SweepRow r;
  r.n = 7;
  r.e_nls = std::nan("");
  r.e_many = 1.25;
  const auto j = r.to_json();
  const auto text = j.dump();
  CHECK(text.find("\"e_nls\":null") != std::string::npos);
  const auto back = SweepRow::from_json(nlohmann::json::parse(text));
  CHECK(std::isnan(back.e_nls));
  CHECK(back.e_many == 1.25);
  CHECK(back.key() == r.key());
}

TEST_CASE("energy bounds: calibration and out-of-regime gating") {
  auto j = small_config();
  j["trap"] = {{"dimension", 2}, {"kind", "harmonic"}};
  j["beta"] = {0.4};
  j["meanfield"] = {{"enabled", false}};
  const auto c = ExperimentConfig::from_json(j);
  std::vector<SweepRow> rows;
  for (int n : {2, 4, 8}) {
    SweepRow r;
    r.n = n;
    r.beta = 0.4;
    r.epsilon = 0.5;
    r.e_many = 1.0;
    r.e_hartree_modes = 1.0 + 0.1 / n;
    r.e_hartree_eps_modes = 1.0 + 0.05 / n;
    rows.push_back(r);
  }
  const auto bounds = check_energy_bounds(c, rows);
  std::map<std::string, const BoundCheck*> by;
  for (const auto& b : bounds) by[b.name] = &b;
  REQUIRE(by.count("variational_upper"));
  CHECK(by["variational_upper"]->status == "PASS");
  CHECK(by["lower_eps"]->status == "OUT-OF-REGIME");
  CHECK(by["lower_eps"]->reason.find("beta >=") != std::string::npos);
  CHECK(by["hartree_rate"]->status == "OUT-OF-REGIME");
  CHECK(by["nls_upper"]->status == "OUT-OF-REGIME");
  CHECK(by["nls_lower"]->reason.find("disabled") != std::string::npos);

  // 1D with beta > 0: gap decaying faster than N^-1/5 passes, a growing gap fails
  auto j1 = small_config();
  j1["beta"] = {0.2};
  j1["meanfield"] = {{"enabled", false}};
  const auto c1 = ExperimentConfig::from_json(j1);
  for (auto& r : rows) r.beta = 0.2;
  auto b1 = check_energy_bounds(c1, rows);
  for (const auto& b : b1)
    if (b.name == "lower_1d") {
      CHECK(b.status == "PASS");
      CHECK(b.exponent == doctest::Approx(-0.2));
      CHECK(b.constant == doctest::Approx(0.05 * std::pow(2.0, 0.2)));
    }
  rows.back().e_hartree_modes = 2.0;
  for (const auto& b : check_energy_bounds(c1, rows))
    if (b.name == "lower_1d") CHECK(b.status == "FAIL");
  // variational violation
  rows.back().e_many = 3.0;
  for (const auto& b : check_energy_bounds(c1, rows))
    if (b.name == "variational_upper") CHECK(b.status == "FAIL");
}

TEST_CASE("exponent tables") {
  CHECK(hartree_rate_exponent(1, 2) == make_rational(1, 3));
  CHECK(hartree_rate_exponent(2, 2) == make_rational(1, 4));
  CHECK(hartree_rate_exponent(3, 2) == make_rational(1, 5));
  CHECK(hartree_rate_exponent(1, 0) == make_rational(2, 5));
  CHECK(beta_threshold(1, 2, true) == make_rational(1, 2));
  CHECK(beta_threshold(2, 2, true) == make_rational(1, 6));
  CHECK(beta_threshold(3, 2, true) == make_rational(1, 12));
  CHECK(beta_threshold(2, 2, false) == make_rational(1, 8));
  CHECK(one_d_exponent(2) == make_rational(1, 5));
  CHECK(make_rational(4, 8).str() == "1/2");
  CHECK(rate_cell(1, 2) == "N^{-1/3}");

  MeasuredSlopes m;
  RateFit f;
  f.slope = -0.31;
  f.half_width = 0.05;
  f.points = 5;
  m[{1, 2}] = f;
  const std::string t1 = render_table1(m);
  CHECK(t1.find("N^{-1/3}") != std::string::npos);
  CHECK(t1.find("-0.31") != std::string::npos);
  CHECK(render_table2().find("1/12") != std::string::npos);
  const auto tj = tables_json(m);
  CHECK(tj.dump().find("1/3") != std::string::npos);
}

TEST_CASE("io helpers") {
  fs::create_directories("test-out");
  write_text("test-out/x.txt", "a\nb\n");
  append_line("test-out/x.txt", "c");
  CHECK(read_lines("test-out/x.txt") == std::vector<std::string>{"a", "b", "c"});
  CHECK(read_lines("test-out/missing.txt").empty());
  CHECK(format_double(0.1) == "0.1");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
  const std::string svg = svg_loglog("t", "x", "y", {{"s", {1, 10, 100}, {1, 0.1, 0.01}, false}});
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK_THROWS_AS(read_json_file("test-out/missing.json"), Error);
  write_text("test-out/bad.json", "{\"a\": ");
  try {
    read_json_file("test-out/bad.json");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Config);
  }
  CHECK(slurp("test-out/x.txt") == "a\nb\nc\n");
}
