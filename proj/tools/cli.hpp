#pragma once

#include <ostream>

namespace scvd::cli {

/// Exit codes of the `scvd` executable.
enum Exit : int {
    kOk = 0,
    kVulnerable = 1,  // detect only
    kUsage = 2,       // bad arguments, unreadable input, parse or configuration errors
    kBackend = 3,     // detection backend failed or refused
};

/// Runs one command line. Artifacts go to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace scvd::cli
