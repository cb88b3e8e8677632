#pragma once

#include <exception>
#include <iosfwd>
#include <string>
#include <vector>

namespace wg {

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitUsage = 2, kExitValidation = 3,
                      kExitSolver = 4 };

/// Exit code for an exception escaping a subcommand.
int exit_code_for(std::exception_ptr error);

/// Entry point of the `wg` command-line tool. args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace wg
