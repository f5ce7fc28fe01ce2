#pragma once

#include <string>
#include <vector>

#include "dtnlab/config.hpp"

namespace dtnlab {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitPairInvalid = 3,
  kExitSolver = 4,
  kExitAcceptance = 5,
};

struct RunOutcome {
  int exit_code = kExitOk;
  std::vector<std::string> summary;  // human-readable lines
  std::vector<std::string> artifacts;
};

/// Runs the configured experiment, writing its CSV (and optional SVG) below
/// out_dir. Errors are mapped to exit codes instead of being thrown.
RunOutcome run(const RunConfig& config, const std::string& out_dir);

/// Exit code for an exception escaping an experiment.
int exit_code_for(const std::exception& e);

}  // namespace dtnlab
