#pragma once

#include <iosfwd>

namespace pushability {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitDomain = 1, kExitUsage = 2 };

/// Runs `pushability <gen|segment|classify|train|predict|report> ...`.
/// Results go to `out`, diagnostics to `err`; never throws.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pushability
