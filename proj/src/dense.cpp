#include "rfdae/dense.hpp"

#include <cmath>

#include "rfdae/errors.hpp"

namespace rfdae {

void DenseLayer::init_uniform(Rng& rng) {
  const double gain = activation == Activation::kRelu ? 2.0 : 1.0;
  const double k = std::sqrt(3.0 * gain / static_cast<double>(in_features()));
  for (double& w : weight.span()) w = rng.uniform(-k, k);
  bias.fill(0.0);
}

Vector dense_forward(const DenseLayer& layer, const Vector& x, DenseCache* cache) {
  if (x.size() != layer.in_features()) {
    throw ShapeError("dense_forward: input length " + std::to_string(x.size()) +
                     " does not match weight " + layer.weight.shape_string());
  }
  Vector pre = layer.bias;
  kernels::gemv_acc(layer.weight.data(), layer.weight.rows(), layer.weight.cols(), x.data(),
                    pre.data());
  require_finite(pre.span(), "dense_forward output");
  Vector out = pre;
  if (layer.activation == Activation::kRelu) {
    for (double& v : out) v = v > 0.0 ? v : 0.0;
  }
  if (cache != nullptr) {
    cache->input = x;
    cache->pre_activation = std::move(pre);
    cache->valid = true;
  }
  return out;
}

Vector dense_backward_acc(const DenseLayer& layer, const DenseCache& cache,
                          const Vector& upstream, DenseGrads& grads) {
  if (!cache.valid) throw StateError("dense_backward called without a cached forward pass");
  if (upstream.size() != layer.out_features()) {
    throw ShapeError("dense_backward: upstream length " + std::to_string(upstream.size()) +
                     " does not match weight " + layer.weight.shape_string());
  }
  Vector delta = upstream;
  if (layer.activation == Activation::kRelu) {
    for (std::size_t i = 0; i < delta.size(); ++i) {
      if (!(cache.pre_activation[i] > 0.0)) delta[i] = 0.0;
    }
  }
  for (std::size_t i = 0; i < delta.size(); ++i) grads.bias[i] += delta[i];
  kernels::outer_acc(grads.weight.data(), layer.weight.rows(), layer.weight.cols(), delta.data(),
                     cache.input.data());
  Vector grad_input(layer.in_features());
  kernels::gemv_t_acc(layer.weight.data(), layer.weight.rows(), layer.weight.cols(), delta.data(),
                      grad_input.data());
  return grad_input;
}

DenseBackward dense_backward(const DenseLayer& layer, const DenseCache& cache,
                             const Vector& upstream) {
  DenseBackward out{DenseGrads(layer), {}};
  out.grad_input = dense_backward_acc(layer, cache, upstream, out.grads);
  return out;
}

}  // namespace rfdae
