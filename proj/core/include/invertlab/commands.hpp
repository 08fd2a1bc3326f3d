#pragma once

#include "invertlab/run_report.hpp"

#include <string>
#include <vector>

namespace invertlab {

/// Stable process exit codes.
enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitPrecondition = 3, kExitNumerical = 4 };

int exit_code_for(const std::exception& e);

struct CommandOutcome {
  RunReport report;
  int exit_code = kExitOk;
  /// One-line human summary for the terminal.
  std::string summary;
};

/// Names accepted by run_command: fiber, trace, condenser, section,
/// verify-identities.
const std::vector<std::string>& command_names();

/// Runs one pipeline with artifacts and report.json written below
/// config.out. Errors are caught, recorded in the report's status and
/// mapped to exit codes; the report is written whenever the output
/// directory is usable.
CommandOutcome run_command(const std::string& command, const RunConfig& config);

/// Re-hashes the artifacts listed in out_dir/report.json. Throws
/// ConfigError when there is no readable report.
nlohmann::json verify_report(const std::filesystem::path& out_dir);

}  // namespace invertlab
