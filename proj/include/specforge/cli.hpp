#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "specforge/error.hpp"

namespace specforge::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kValidationFailed = 2,
  kMissingArtifact = 3,
  kProviderError = 4,
};

int exit_code_for(ErrorCode code);

// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace specforge::cli
