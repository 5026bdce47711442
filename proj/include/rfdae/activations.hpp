#pragma once

#include <cmath>
#include <span>

#include "rfdae/matrix.hpp"

namespace rfdae {

// Logistic function in the branch-stable form; never overflows for finite input.
inline double sigmoid(double z) {
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Vector sigmoid(const Vector& x);
Vector tanh_act(const Vector& x);
Vector relu(const Vector& x);
// Max-subtracted softmax. Requires a non-empty input.
Vector softmax(const Vector& logits);

// In-place variants for the hot path.
void sigmoid_inplace(std::span<double> x);
void tanh_inplace(std::span<double> x);
void softmax_inplace(std::span<double> x);

}  // namespace rfdae
