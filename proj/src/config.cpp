#include "mflab/config.hpp"

#include <fstream>
#include <sstream>

namespace mflab {

namespace {

std::string join(const std::string& path, const char* key) { return path.empty() ? key : path + "." + key; }

}  // namespace

bool SchemaChecker::object(const nlohmann::json& j, const std::string& path,
                           std::initializer_list<const char*> allowed) {
  if (!j.is_object()) {
    fail(path.empty() ? "<root>" : path, "expected an object");
    return false;
  }
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) ok = true;
    if (!ok) fail(join(path, key.c_str()), "unknown key");
  }
  return true;
}

bool SchemaChecker::require(const nlohmann::json& j, const std::string& path, const char* key) {
  if (j.is_object() && j.contains(key)) return true;
  fail(join(path, key), "missing required key");
  return false;
}

double SchemaChecker::number(const nlohmann::json& j, const std::string& path, const char* key, double fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number()) {
    fail(join(path, key), "expected a number");
    return fallback;
  }
  return v.get<double>();
}

int SchemaChecker::integer(const nlohmann::json& j, const std::string& path, const char* key, int fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_integer()) {
    fail(join(path, key), "expected an integer");
    return fallback;
  }
  return v.get<int>();
}

bool SchemaChecker::boolean(const nlohmann::json& j, const std::string& path, const char* key, bool fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_boolean()) {
    fail(join(path, key), "expected true or false");
    return fallback;
  }
  return v.get<bool>();
}

std::string SchemaChecker::string(const nlohmann::json& j, const std::string& path, const char* key,
                                  const std::string& fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_string()) {
    fail(join(path, key), "expected a string");
    return fallback;
  }
  return v.get<std::string>();
}

std::vector<double> SchemaChecker::numbers(const nlohmann::json& j, const std::string& path, const char* key) {
  std::vector<double> out;
  if (!j.is_object() || !j.contains(key)) return out;
  const auto& v = j.at(key);
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array()) {
    fail(join(path, key), "expected a number or a list of numbers");
    return out;
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) fail(join(path, key) + "[" + std::to_string(i) + "]", "expected a number");
    else out.push_back(v[i].get<double>());
  }
  return out;
}

void SchemaChecker::finish() const {
  if (errors_.empty()) return;
  std::ostringstream os;
  os << "invalid configuration (" << errors_.size() << " problem" << (errors_.size() > 1 ? "s" : "") << ")";
  for (const auto& e : errors_) os << "\n  " << e;
  throw Error(ErrorCode::Config, os.str());
}

TrapConfig parse_trap(const nlohmann::json& j, const std::string& path, SchemaChecker& sc) {
  TrapConfig t;
  if (!sc.object(j, path, {"dimension", "kind", "exponent", "coefficient", "lower_c", "lower_C", "omega", "values"}))
    return t;
  t.dim = sc.integer(j, path, "dimension", 1);
  const std::string kind = sc.string(j, path, "kind", "harmonic");
  if (kind == "harmonic") t.kind = TrapKind::Harmonic;
  else if (kind == "power") t.kind = TrapKind::PowerLaw;
  else if (kind == "box") t.kind = TrapKind::Box;
  else if (kind == "tabulated") t.kind = TrapKind::Tabulated;
  else sc.fail(path + ".kind", "expected harmonic, power, box or tabulated");
  t.exponent = sc.number(j, path, "exponent", 2.0);
  t.coefficient = sc.number(j, path, "coefficient", 1.0);
  t.lower_c = sc.number(j, path, "lower_c", 1.0);
  t.lower_C = sc.number(j, path, "lower_C", 0.0);
  t.omega = sc.number(j, path, "omega", 0.0);
  t.values = sc.numbers(j, path, "values");
  if (t.kind == TrapKind::Harmonic) t.exponent = 2.0;
  try {
    t.validate();
  } catch (const Error& e) {
    sc.fail(path, e.what());
  }
  return t;
}

GridSpec parse_grid(const nlohmann::json& j, const std::string& path, SchemaChecker& sc) {
  GridSpec g;
  if (!sc.object(j, path, {"extent", "points", "modes", "analytic", "richardson", "check_leakage"})) return g;
  g.extent = sc.number(j, path, "extent", g.extent);
  g.points = sc.integer(j, path, "points", g.points);
  g.modes = sc.integer(j, path, "modes", g.modes);
  g.analytic = sc.boolean(j, path, "analytic", g.analytic);
  g.richardson = sc.boolean(j, path, "richardson", g.richardson);
  g.check_leakage = sc.boolean(j, path, "check_leakage", g.check_leakage);
  if (!(g.extent > 0.0)) sc.fail(path + ".extent", "must be positive");
  if (g.points < 3) sc.fail(path + ".points", "must be at least 3");
  if (g.modes < 1) sc.fail(path + ".modes", "must be at least 1");
  return g;
}

nlohmann::json check_interaction(const nlohmann::json& j, const std::string& path, SchemaChecker& sc) {
  if (!sc.object(j, path, {"profile", "terms", "amplitude", "width", "radius", "radii", "values"})) return j;
  if (!sc.require(j, path, "profile")) return j;
  const std::string profile = sc.string(j, path, "profile", "");
  if (profile == "zero") return j;
  if (profile == "gaussian") {
    if (j.contains("terms")) {
      if (!j.at("terms").is_array() || j.at("terms").empty()) {
        sc.fail(path + ".terms", "expected a non-empty list");
        return j;
      }
      for (std::size_t i = 0; i < j.at("terms").size(); ++i) {
        const std::string p = path + ".terms[" + std::to_string(i) + "]";
        const auto& t = j.at("terms")[i];
        if (!sc.object(t, p, {"amplitude", "width"})) continue;
        sc.require(t, p, "amplitude");
        if (sc.require(t, p, "width") && !(sc.number(t, p, "width", 1.0) > 0.0)) sc.fail(p + ".width", "must be positive");
        sc.number(t, p, "amplitude", 0.0);
      }
    } else {
      sc.require(j, path, "amplitude");
      if (sc.require(j, path, "width") && !(sc.number(j, path, "width", 1.0) > 0.0))
        sc.fail(path + ".width", "must be positive");
    }
    return j;
  }
  if (profile == "bump") {
    sc.require(j, path, "amplitude");
    if (sc.require(j, path, "radius") && !(sc.number(j, path, "radius", 1.0) > 0.0))
      sc.fail(path + ".radius", "must be positive");
    return j;
  }
  if (profile == "tabulated") {
    sc.require(j, path, "radii");
    sc.require(j, path, "values");
    if (sc.numbers(j, path, "radii").size() != sc.numbers(j, path, "values").size())
      sc.fail(path, "radii and values differ in length");
    return j;
  }
  sc.fail(path + ".profile", "expected zero, gaussian, bump or tabulated");
  return j;
}

nlohmann::json grid_to_json(const GridSpec& g) {
  return {{"extent", g.extent},     {"points", g.points},         {"modes", g.modes},
          {"analytic", g.analytic}, {"richardson", g.richardson}, {"check_leakage", g.check_leakage}};
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::Config, path + ": " + e.what());
  }
}

}  // namespace mflab
