#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rfdae/rng.hpp"

namespace rfdae {

struct ParamTensor {
  std::string name;
  std::span<double> values;
};

// Anything with tunable parameters, a scalar loss, and analytic gradients of that loss.
class Differentiable {
 public:
  virtual ~Differentiable() = default;

  virtual std::vector<ParamTensor> parameters() = 0;
  // Scalar loss at the current parameter values. Must be deterministic.
  virtual double loss() = 0;
  // Analytic gradients, one buffer per entry of parameters(), in the same order and size.
  virtual std::vector<std::vector<double>> gradients() = 0;
};

inline constexpr std::size_t kNoIndex = static_cast<std::size_t>(-1);

struct TensorCheck {
  std::string name;
  double max_relative_error = 0.0;
  std::size_t probes = 0;
  std::size_t worst_index = kNoIndex;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::string parameter_name;  // tensor holding the worst entry
  std::size_t worst_index = kNoIndex;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  bool passed = true;
  std::vector<TensorCheck> tensors;
};

struct GradCheckOptions {
  double step = 1e-5;
  // 0 probes every entry; otherwise at most this many entries per tensor, chosen with the rng.
  std::size_t max_probes_per_tensor = 0;
};

// Compares analytic gradients with central differences (f(x+h) - f(x-h)) / 2h.
// Relative error per entry is |a - n| / max(|a|, |n|, 1e-8); passed iff the maximum over all
// probed entries is below `tolerance`. Parameter values are restored afterwards.
GradCheckReport grad_check(Differentiable& unit, Rng& rng, double tolerance,
                           const GradCheckOptions& options = {});

double relative_error(double analytic, double numeric);

}  // namespace rfdae
