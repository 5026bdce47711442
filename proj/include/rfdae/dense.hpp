#pragma once

#include <cstddef>

#include "rfdae/matrix.hpp"
#include "rfdae/rng.hpp"

namespace rfdae {

enum class Activation { kNone, kRelu };

// Fully connected layer y = act(W x + b), W stored out x in.
struct DenseLayer {
  Matrix weight;
  Vector bias;
  Activation activation = Activation::kNone;

  DenseLayer() = default;
  DenseLayer(std::size_t in, std::size_t out, Activation act)
      : weight(out, in), bias(out), activation(act) {}

  std::size_t in_features() const { return weight.cols(); }
  std::size_t out_features() const { return weight.rows(); }
  std::size_t parameter_count() const { return weight.size() + bias.size(); }

  // Variance-preserving: W ~ Uniform(-k, k), k = sqrt(3 * gain / in), gain 2 for ReLU layers
  // and 1 for linear ones; b = 0.
  void init_uniform(Rng& rng);
};

// Values saved by dense_forward for the matching dense_backward call.
struct DenseCache {
  Vector input;
  Vector pre_activation;
  bool valid = false;
};

struct DenseGrads {
  Matrix weight;
  Vector bias;

  DenseGrads() = default;
  explicit DenseGrads(const DenseLayer& layer)
      : weight(layer.weight.rows(), layer.weight.cols()), bias(layer.bias.size()) {}
};

struct DenseBackward {
  DenseGrads grads;
  Vector grad_input;
};

// Computes act(W x + b). When `cache` is non-null the input and pre-activation are stored in it.
Vector dense_forward(const DenseLayer& layer, const Vector& x, DenseCache* cache = nullptr);

// Gradients for a forward pass recorded in `cache`. ReLU uses subgradient 0 at exactly 0.
DenseBackward dense_backward(const DenseLayer& layer, const DenseCache& cache,
                             const Vector& upstream);

// Same, accumulating parameter gradients into `grads` and returning the input gradient.
Vector dense_backward_acc(const DenseLayer& layer, const DenseCache& cache,
                          const Vector& upstream, DenseGrads& grads);

}  // namespace rfdae
