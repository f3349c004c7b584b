#pragma once

#include <ostream>

namespace hps {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Entry point of the hps tool. Subcommands: run, ablate, gen-synth, report,
// validate-dataset. HPS_OUTPUT_DIR and HPS_JOBS override the experiment
// file; command-line flags override both. Errors print a single line
// "error: <category>: <message>" to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hps
