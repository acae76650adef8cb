#pragma once

#include <iosfwd>

namespace dsos::cli {

enum ExitCode { kOk = 0, kInputError = 2, kSolverFailure = 3 };

// Runs one command line. The JSON result goes to out (or --out), summaries
// and errors to err.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dsos::cli
