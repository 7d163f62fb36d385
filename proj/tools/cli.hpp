#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace fastqm::cli {

/// Process exit codes.
enum ExitCode : int { kOk = 0, kUsage = 1, kIo = 2, kNumerical = 3 };

/// Runs the command line `args` (args[0] is the program name) and returns the exit code.
/// Normal output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Flat "key = value" configuration file; '#' starts a comment line.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path);

}  // namespace fastqm::cli
