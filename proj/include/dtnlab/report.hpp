#pragma once

#include <string>
#include <vector>

#include "dtnlab/convergence.hpp"

namespace dtnlab {

/// Column schema plus string cells; rendering prepends the schema_version and
/// config_hash columns to every row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row);
};

/// Shortest text that parses back to the same double.
std::string format_number(double v);
std::string render_csv(const CsvTable& t, const std::string& config_hash);

CsvTable convergence_table(const ConvergenceReport& r);

/// Log-scale polyline plot of every metric against n_osc.
std::string render_svg(const ConvergenceReport& r, const std::string& title);

/// Writes the file, throwing ConfigError when the path is not writable.
void write_text(const std::string& path, const std::string& content);

}  // namespace dtnlab
