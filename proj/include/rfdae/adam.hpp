#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rfdae/gradcheck.hpp"
#include "rfdae/model.hpp"

namespace rfdae {

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t step = 0;
  std::vector<std::vector<double>> m1;  // first moments, one buffer per tensor
  std::vector<std::vector<double>> m2;  // second moments

  AdamState() = default;
  explicit AdamState(double learning_rate) : lr(learning_rate) {}
};

// One bias-corrected Adam update:
//   m1 <- b1 m1 + (1 - b1) g,  m2 <- b2 m2 + (1 - b2) g^2
//   theta <- theta - lr * m1_hat / (sqrt(m2_hat) + eps)
// Moment buffers are sized on the first call. Every gradient is checked before any parameter
// is touched; a non-finite entry throws NumericError naming the tensor.
void adam_step(std::span<const ParamTensor> params, std::span<const std::span<const double>> grads,
               AdamState& state);

void adam_step(DaeModel& model, const ModelGradients& grads, AdamState& state);

}  // namespace rfdae
