#pragma once

#include <iosfwd>

namespace apstag {

enum ExitCode : int {
    exit_ok = 0,
    exit_failure = 1,
    exit_config = 2,
    exit_unstable = 3,
    exit_io = 4,
};

/// Entry point of the `apstag` tool. Subcommands: run, converge, stability,
/// ap-check, dump-config. Returns one of ExitCode.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace apstag
