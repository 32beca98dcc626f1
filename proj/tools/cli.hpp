#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bri::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kVerifyFailed = 1,
  kSingular = 2,
  kUsage = 3,
};

/// Runs one subcommand; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bri::cli
