#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace structflow::cli {

/// Exit codes: 0 success, 1 invalid arguments or runtime failure, 2 a
/// malformed input file (the message names the file and line).
enum ExitCode : int { kOk = 0, kFailure = 1, kParseError = 2 };

/// Runs the `structflow` command line. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace structflow::cli
