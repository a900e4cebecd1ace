#pragma once

// Subcommands of the qsense executable: fringes, gsq, adapt, compare.

#include <string>
#include <vector>

namespace qsense::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kIoError = 3,
  kNumericalFailure = 4,
};

/// Parses argv (argv[0] is the program name) and runs one subcommand.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

}  // namespace qsense::cli
