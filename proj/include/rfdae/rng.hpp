#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace rfdae {

// Seeded pseudo-random source.
//
// The engine is std::mt19937_64. Every derived value (uniform doubles, normals, bounded
// integers) is computed here from raw 64-bit engine output rather than through the
// std:: distributions, so the stream is identical across standard library vendors.
//
// Independent substreams are obtained with substream(label) or child(key). A child's
// seed is a SplitMix64 mix of the parent's *seed* and the key, never of the parent's
// current position, so consuming values from one stream cannot perturb another.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t seed() const { return seed_; }

  // Child stream keyed by a text label ("init", "dropout", "mask", "shuffle", "synth", ...).
  Rng substream(std::string_view label) const;
  // Child stream keyed by an integer, e.g. an epoch or example index.
  Rng child(std::uint64_t key) const;

  std::uint64_t next_u64() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);
  // Standard normal (Box-Muller, one value per call).
  double normal();
  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace rfdae
