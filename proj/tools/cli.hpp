#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace robreg::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kConvergence = 3 };

/// Runs the robreg command line with `args` (without the program name).
/// Normal output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace robreg::cli
