#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qc {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitInvalid = 1, kExitUsage = 2, kExitIo = 3 };

/// Runs the qctool command line (arguments without the program name).
/// Subcommands: generate, validate, slice, export, stats, serve.
int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace qc
