#pragma once

#include <initializer_list>
#include <string>
#include <vector>

#include <json.hpp>

#include "mflab/error.hpp"
#include "mflab/interaction.hpp"
#include "mflab/onebody.hpp"

namespace mflab {

/// Collects every schema problem of a JSON document before failing, so a
/// single run reports all offending keys with their paths.
class SchemaChecker {
 public:
  /// Records keys of `j` (an object at `path`) outside `allowed`.
  bool object(const nlohmann::json& j, const std::string& path, std::initializer_list<const char*> allowed);
  bool require(const nlohmann::json& j, const std::string& path, const char* key);

  double number(const nlohmann::json& j, const std::string& path, const char* key, double fallback);
  int integer(const nlohmann::json& j, const std::string& path, const char* key, int fallback);
  bool boolean(const nlohmann::json& j, const std::string& path, const char* key, bool fallback);
  std::string string(const nlohmann::json& j, const std::string& path, const char* key, const std::string& fallback);
  std::vector<double> numbers(const nlohmann::json& j, const std::string& path, const char* key);

  void fail(const std::string& path, const std::string& message) { errors_.push_back(path + ": " + message); }
  const std::vector<std::string>& errors() const { return errors_; }
  /// Throws Error(Config) listing every recorded problem.
  void finish() const;

 private:
  std::vector<std::string> errors_;
};

/// Strictly validated sub-documents.
TrapConfig parse_trap(const nlohmann::json& j, const std::string& path, SchemaChecker& sc);
GridSpec parse_grid(const nlohmann::json& j, const std::string& path, SchemaChecker& sc);
/// Validates the interaction spec; returns the spec unchanged (potentials are built on demand).
nlohmann::json check_interaction(const nlohmann::json& j, const std::string& path, SchemaChecker& sc);

nlohmann::json grid_to_json(const GridSpec& g);

/// Reads a JSON file; parse errors become Error(Config) with the byte position.
nlohmann::json read_json_file(const std::string& path);

}  // namespace mflab
