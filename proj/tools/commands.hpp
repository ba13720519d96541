#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace lp::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitDiverged = 3,
};

/// Runs `landscape-probe` with argv-style arguments (args[0] is the program
/// name). Diagnostics go to `err`, summaries to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lp::cli
