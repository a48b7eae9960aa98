#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace amflat::cli {

/// Exit codes of run().
enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,   // verify found a failing check
  kUsage = 2,         // bad arguments or configuration
  kAborted = 3,       // simulation stopped by a guard; partial output written
};

/// Entry point of the amflat tool. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace amflat::cli
