#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace sdosim::cli {

/// Runs the command line `args` (without the program name). Returns the
/// process exit code: 0 success, 1 usage error, 2 runtime error.
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace sdosim::cli
