#pragma once

#include <iosfwd>

namespace dmm::cli {

enum ExitCode : int {
  kOk = 0,
  kVerificationFailed = 1,
  kSpecError = 2,
  kAllDiverged = 3,
};

// Entry point shared by the `dmm` binary and the tests.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dmm::cli
