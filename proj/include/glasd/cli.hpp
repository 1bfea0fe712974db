#pragma once

// Command-line front end. Subcommands: optimize, estimate, benchmark,
// simulate, outlier-report, replay.
//
// Exit codes: 0 success, 1 runtime failure (degenerate data, numerical
// breakdown), 2 bad arguments, invalid config or malformed input.

#include <ostream>

namespace glasd {

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace glasd
