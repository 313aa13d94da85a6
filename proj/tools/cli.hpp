#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wavepalm::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kDegenerateModel = 3,
  kBudgetExceeded = 4,
  kInsufficientSamples = 5,
};

/// Runs the command line `args` (without the program name), writing reports
/// to `out` and diagnostics to `err`. Returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// 64-bit FNV-1a digest of a file's bytes, as 16 hex digits.
std::string file_digest(const std::string& path);

}  // namespace wavepalm::cli
