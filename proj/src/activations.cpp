#include "rfdae/activations.hpp"

#include <algorithm>
#include <cmath>

#include "rfdae/errors.hpp"

namespace rfdae {

void sigmoid_inplace(std::span<double> x) {
  for (double& v : x) v = sigmoid(v);
}

void tanh_inplace(std::span<double> x) {
  for (double& v : x) v = std::tanh(v);
}

void softmax_inplace(std::span<double> x) {
  if (x.empty()) throw ShapeError("softmax of an empty vector");
  const double peak = *std::max_element(x.begin(), x.end());
  double total = 0.0;
  for (double& v : x) {
    v = std::exp(v - peak);
    total += v;
  }
  for (double& v : x) v /= total;
}

Vector sigmoid(const Vector& x) {
  Vector out = x;
  sigmoid_inplace(out.span());
  return out;
}

Vector tanh_act(const Vector& x) {
  Vector out = x;
  tanh_inplace(out.span());
  return out;
}

Vector relu(const Vector& x) {
  Vector out = x;
  for (double& v : out) v = v > 0.0 ? v : 0.0;
  return out;
}

Vector softmax(const Vector& logits) {
  require_finite(logits.span(), "softmax input");
  Vector out = logits;
  softmax_inplace(out.span());
  return out;
}

}  // namespace rfdae
