#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace datctl {

enum ExitCode : int { kOk = 0, kParseError = 1, kValidationError = 2, kStatsError = 3 };

/// Runs one datctl invocation. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace datctl
