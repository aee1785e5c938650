#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace modsig {

/// Exit codes of the command-line interface.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitData = 3,
  kExitDegenerate = 4,
};

/// Dispatches `args` (without the program name) to one of the subcommands
/// test, fit, compare-models, diagnose, bootstrap, simulate. Reports go to
/// --out when given, otherwise to `out`; errors are one line on `err`.
int run_command(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace modsig
