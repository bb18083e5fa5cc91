#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace rbench {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;   // usage, input or configuration error
inline constexpr int kExitPartial = 2;   // evaluate finished with failed or unscored entries

/// Dispatches one command line (without the program name).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rbench
