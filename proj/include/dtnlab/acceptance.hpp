#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dtnlab {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

/// Runs one acceptance criterion (1-10); exceptions count as failures.
CriterionResult run_criterion(int id, std::uint64_t seed = 42);

/// Two identical converge runs below scratch_dir must give byte-identical CSVs.
bool determinism_check(const std::string& scratch_dir, std::uint64_t seed, std::string& detail);

/// Criteria 1-10 followed by criterion 11 (all previous pass and determinism).
std::vector<CriterionResult> run_acceptance(std::uint64_t seed, const std::string& scratch_dir);

/// One line: "criterion <id> PASS|FAIL  <title>: <detail> (<seconds>s)".
std::string format_result(const CriterionResult& r);

}  // namespace dtnlab
