#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dtnlab/convergence.hpp"

namespace dtnlab {

inline constexpr int kSchemaVersion = 1;

struct GeometryConfig {
  std::string kind = "interval";  // interval | rectangle
  Eigen::Index n = 16;
  Eigen::Index nx = 0;
  Eigen::Index ny = 0;
  bool operator==(const GeometryConfig&) const = default;
};

struct PivotConfig {
  std::string gram = "default";  // default | custom
  std::vector<double> weights;
  bool operator==(const PivotConfig&) const = default;
};

struct ExperimentConfig {
  std::string kind = "validate";  // validate | dtn | graph | sector | converge | resolvent
  std::string mode = "wot";       // converge: wot | compressed | indep_bc
  std::vector<ScheduleRow> schedule;
  std::optional<CoefficientSpec> a_limit;
  std::optional<CoefficientSpec> m_limit;
  std::optional<CoefficientSpec> a_odd;
  std::optional<CoefficientSpec> m_odd;
  double mu = 0.0;  // 0 means: take the coercivity floor of the first member
  double norm_cap = 1e6;
  std::vector<double> lambda_offsets{1.0};
  int witnesses = 8;
  std::vector<std::string> rhs{"1"};
  std::vector<std::pair<double, double>> bcs{{0.0, 1.0}, {1.0, -1.0}};
  int samples = 200;
  bool control_run = true;
  bool operator==(const ExperimentConfig&) const = default;
};

struct OutputConfig {
  std::string csv_path;  // empty: <kind>.csv
  std::optional<std::string> svg_path;
  std::uint64_t seed = 42;
  bool record_runtime = false;
  bool operator==(const OutputConfig&) const = default;
};

struct RunConfig {
  int schema_version = kSchemaVersion;
  GeometryConfig geometry;
  CoefficientSpec a = CoefficientSpec::make_constant(1.0);
  CoefficientSpec m = CoefficientSpec::make_constant(1.0);
  PivotConfig pivot;
  ExperimentConfig experiment;
  OutputConfig output;
  bool operator==(const RunConfig&) const = default;
};

struct ConfigIssue {
  std::string path;  // JSON pointer
  int line = 0;      // 1-based, 0 when unknown
  int column = 0;
  std::string message;
};

/// All problems found in a configuration document.
class ConfigParseError : public ConfigError {
 public:
  explicit ConfigParseError(std::vector<ConfigIssue> issues);
  const std::vector<ConfigIssue>& issues() const noexcept { return issues_; }

 private:
  std::vector<ConfigIssue> issues_;
};

struct ParsedConfig {
  RunConfig config;
  std::vector<ConfigIssue> warnings;  // unknown keys outside strict mode
};

/// Parses and validates a JSON document. Unknown keys are errors in strict
/// mode and warnings otherwise.
ParsedConfig parse_config(const std::string& text, bool strict = true);
std::string serialize_config(const RunConfig& c);
/// 16 hex digits of FNV-1a over the canonical serialization.
std::string config_hash(const RunConfig& c);

/// Built-in configuration for a subcommand run without --config.
RunConfig default_config(const std::string& kind);

/// Builds the interval or rectangle pair of the geometry section.
DualPair build_pair(const GeometryConfig& g);
CoefficientSequence make_sequence(const RunConfig& c);
ExperimentOptions make_options(const RunConfig& c);

}  // namespace dtnlab
