#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qmrisim::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
  kOk = 0,
  kVerificationFailed = 1,
  kUsageError = 2,
  kIoOrValidationError = 3,
};

/// Runs the `qmrisim` command line. argv[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qmrisim::cli
