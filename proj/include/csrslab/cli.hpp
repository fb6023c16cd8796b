#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace csrslab::cli {

enum ExitCode : int {
  kOk = 0,
  kInputError = 1,     // bad arguments, config or CSV
  kNotConverged = 2,   // analysis ran but at least one fit did not converge
};

/// Runs the command line `args` (without the program name). Human-readable
/// progress goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace csrslab::cli
