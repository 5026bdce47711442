#include "rfdae/bench.hpp"

#include <sys/utsname.h>

#include <chrono>
#include <cmath>
#include <thread>

#include "rfdae/errors.hpp"
#include "rfdae/features.hpp"
#include "rfdae/rng.hpp"
#include "rfdae/synth.hpp"

namespace rfdae {

namespace {

using Clock = std::chrono::steady_clock;

// Keeps the optimizer from discarding forward passes.
volatile double g_sink = 0.0;

}  // namespace

double clock_resolution_seconds() {
  double best = 1.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = Clock::now();
    auto b = Clock::now();
    while (b == a) b = Clock::now();
    best = std::min(best, std::chrono::duration<double>(b - a).count());
  }
  return best;
}

std::string platform_descriptor() {
  std::string out;
  utsname u{};
  if (uname(&u) == 0) {
    out = std::string(u.sysname) + " " + u.release + " " + u.machine;
  } else {
    out = "unknown-os";
  }
  out += ", " + std::to_string(std::thread::hardware_concurrency()) + " hw threads";
#if defined(__clang__)
  out += ", clang " __clang_version__;
#elif defined(__GNUC__)
  out += ", gcc " __VERSION__;
#endif
  return out;
}

BenchResult bench(const DaeModel& model, std::size_t seq_len, std::size_t repetitions,
                  double seconds_per_rep, const BenchOptions& options) {
  if (repetitions < 2) throw ConfigError("bench: at least 2 repetitions are required");
  if (options.batch == 0) throw ConfigError("bench: batch must be positive");
  if (!(seconds_per_rep > 0.0)) throw ConfigError("bench: duration per repetition must be positive");
  const double resolution = clock_resolution_seconds();
  if (seconds_per_rep < 1000.0 * resolution) {
    throw ConfigError("bench: clock resolution " + std::to_string(resolution) +
                      " s is too coarse for " + std::to_string(seconds_per_rep) +
                      " s repetitions; use a longer duration");
  }

  DaeModel local = model;
  local.config.seq_len = seq_len;
  std::vector<Matrix> inputs;
  for (std::size_t b = 0; b < options.batch; ++b) {
    Rng rng = Rng(options.seed).substream("bench").child(b);
    ChannelSpec channel;
    channel.snr_db = 10.0;
    const Matrix iq = synthesize(Modulation::kQpsk, seq_len, channel, rng, PulseShape{});
    inputs.push_back(apply_transform(local.config.transform, iq));
    if (inputs.back().cols() != local.config.input_features) {
      throw ShapeError("bench: model expects " + std::to_string(local.config.input_features) +
                       " input features");
    }
  }

  auto run_batch = [&] {
    for (const Matrix& x : inputs) g_sink = g_sink + predict(local, x).probs[0];
  };
  for (std::size_t w = 0; w < options.warmup; ++w) run_batch();

  BenchResult r;
  r.repetitions = repetitions;
  r.seq_len = seq_len;
  r.batch = options.batch;
  r.mode = options.batch == 1 ? "single-example" : "batch-" + std::to_string(options.batch);
  r.platform = platform_descriptor();
  for (std::size_t rep = 0; rep < repetitions; ++rep) {
    std::size_t iterations = 0;
    const auto start = Clock::now();
    double elapsed = 0.0;
    do {
      run_batch();
      ++iterations;
      elapsed = std::chrono::duration<double>(Clock::now() - start).count();
    } while (elapsed < seconds_per_rep);
    r.per_repetition.push_back(static_cast<double>(iterations * options.batch) / elapsed);
  }
  double sum = 0.0;
  for (double v : r.per_repetition) sum += v;
  r.mean = sum / static_cast<double>(repetitions);
  double sq = 0.0;
  for (double v : r.per_repetition) sq += (v - r.mean) * (v - r.mean);
  r.std = std::sqrt(sq / static_cast<double>(repetitions - 1));
  return r;
}

}  // namespace rfdae
