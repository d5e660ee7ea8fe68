#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sps {

enum ExitCode : int {
  exit_ok = 0,
  exit_usage = 1,
  exit_not_converged = 2,
  exit_verification = 3,
};

/// Runs one `sps_lab` command (solve, sweep, verify, report). `args` excludes
/// the program name. Settings come from built-in defaults, then the JSON file
/// named by --config or SPS_LAB_CONFIG, then flags.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sps
