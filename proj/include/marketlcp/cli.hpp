#pragma once

#include <iosfwd>

namespace marketlcp {

// Environment variable that overrides the default complementarity tolerance.
inline constexpr const char* kTolEnv = "MARKETLCP_TOL";

// Entry point of the marketlcp command line tool. Returns the process exit
// code: 0 success, 1 validation, 2 solver failure, 3 assertion failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace marketlcp
