#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sfq::cli {

enum ExitCode : int {
  kSuccess = 0,
  kFunctionalFailure = 1,
  kInputError = 2,
  kNumericalFailure = 3,
};

/// Runs one sfqsim invocation. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sfq::cli
