#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace delaystab {

/// Exit statuses of the command-line tool.
enum ExitCode : int { kExitStable = 0, kExitInputError = 1, kExitInconclusive = 2 };

/// Runs the command line `args` (program name first). Reports go to `out`, human-readable
/// summaries and diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace delaystab
