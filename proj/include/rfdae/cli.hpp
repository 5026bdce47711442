#pragma once

namespace rfdae::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,    // bad flags, missing input paths, invalid configuration
  kData = 2,     // unreadable, malformed or incompatible files
  kNumeric = 3,  // NaN/Inf during computation, failed gradient check
};

// Subcommands: gen, train, eval, bench, inspect, gradcheck. Output verbosity comes from
// RFDAE_VERBOSITY (0 quiet, 1 default, 2 debug).
int run(int argc, char** argv);

}  // namespace rfdae::cli
