#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace linrs::cli {

enum ExitCode : int {
  kOk = 0,
  kParseError = 2,
  kSolverError = 3,
  kIoError = 4,
};

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name, e.g. {"solve", "--solver", "r6p-vfix", "--input", "pts.txt"}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace linrs::cli
