#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "rfdae/model.hpp"
#include "rfdae/report.hpp"

namespace rfdae {

struct BenchOptions {
  std::size_t warmup = 50;
  // Examples per timed iteration. 1 is the single-example mode; larger values are labeled
  // "batch-<B>" and still run on the calling thread.
  std::size_t batch = 1;
  std::uint64_t seed = 0;
};

// Times Eval-mode forward passes on a synthetic n-sample input. Each repetition loops until
// `seconds_per_rep` has elapsed and records classifications per second.
// Throws ConfigError when repetitions < 2 or the clock cannot resolve the loop duration.
BenchResult bench(const DaeModel& model, std::size_t seq_len, std::size_t repetitions,
                  double seconds_per_rep, const BenchOptions& options = {});

std::string platform_descriptor();

// Smallest observable step of the monotonic clock, in seconds.
double clock_resolution_seconds();

}  // namespace rfdae
