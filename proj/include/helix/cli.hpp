#pragma once

namespace helix {

// Entry point for the `helix` binary. Subcommands: run, resume, validate,
// report, pareto. Exit codes: 0 success, 1 runtime failure, 2 usage or
// config error.
int run_cli(int argc, const char* const* argv);

}  // namespace helix
