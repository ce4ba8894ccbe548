#pragma once

/// \file cli.hpp
///
/// The `nepid` command line: gen, detect, fit, predict and pspec.
///
/// Exit codes: 0 success, 1 other failure, 2 usage or parse error, 3 I/O
/// error, 4 not nearly periodic, 5 not near unitary, 6 numerical blowup.

#include <iosfwd>

#include "nepid/error.hpp"

namespace nepid::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitUsage = 2,
    kExitIo = 3,
    kExitNotPeriodic = 4,
    kExitNotUnitary = 5,
    kExitBlowup = 6,
};

int exit_code_for(Errc code);

/// Runs one command. Reports go to `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace nepid::cli
