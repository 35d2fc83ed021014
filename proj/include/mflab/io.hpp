#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "mflab/error.hpp"

namespace mflab {

void ensure_directory(const std::string& dir);
void write_text(const std::string& path, const std::string& content);
void append_line(const std::string& path, const std::string& line);
std::vector<std::string> read_lines(const std::string& path);  // empty when missing
void write_json(const std::string& path, const nlohmann::json& j);

/// Shortest round-trip representation ("%.17g" trimmed).
std::string format_double(double v);

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
  bool points_only = false;
};

/// Log-log plot; non-positive values are skipped.
std::string svg_loglog(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                       const std::vector<PlotSeries>& series);

/// Raw little-endian complex doubles plus a JSON sidecar describing them.
void write_complex_vector(const std::string& path, const VectorXc& v, const nlohmann::json& sidecar);

}  // namespace mflab
