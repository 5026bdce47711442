#include "rfdae/adam.hpp"

#include <cmath>

#include "rfdae/errors.hpp"

namespace rfdae {

void adam_step(std::span<const ParamTensor> params, std::span<const std::span<const double>> grads,
               AdamState& state) {
  if (params.size() != grads.size()) throw ShapeError("adam_step: parameter/gradient count mismatch");
  for (std::size_t t = 0; t < params.size(); ++t) {
    if (params[t].values.size() != grads[t].size()) {
      throw ShapeError("adam_step: gradient shape mismatch for " + params[t].name);
    }
    for (double g : grads[t]) {
      if (!std::isfinite(g)) throw NumericError("adam_step: non-finite gradient in " + params[t].name);
    }
  }
  if (state.m1.empty()) {
    for (const auto& p : params) {
      state.m1.emplace_back(p.values.size(), 0.0);
      state.m2.emplace_back(p.values.size(), 0.0);
    }
  }
  if (state.m1.size() != params.size()) throw ShapeError("adam_step: optimizer state layout mismatch");

  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    std::span<double> theta = params[k].values;
    std::span<const double> g = grads[k];
    std::vector<double>& m1 = state.m1[k];
    std::vector<double>& m2 = state.m2[k];
    if (m1.size() != theta.size()) throw ShapeError("adam_step: moment shape mismatch for " + params[k].name);
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m1[i] = state.beta1 * m1[i] + (1.0 - state.beta1) * g[i];
      m2[i] = state.beta2 * m2[i] + (1.0 - state.beta2) * g[i] * g[i];
      const double m_hat = m1[i] / c1;
      const double v_hat = m2[i] / c2;
      theta[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
  }
}

void adam_step(DaeModel& model, const ModelGradients& grads, AdamState& state) {
  std::vector<ParamTensor> params;
  model.for_each_tensor([&](const std::string& name, std::span<double> v, TensorShape) {
    params.push_back({name, v});
  });
  std::vector<std::span<const double>> g;
  grads.for_each_tensor([&](const std::string&, std::span<const double> v, TensorShape) {
    g.push_back(v);
  });
  adam_step(params, g, state);
}

}  // namespace rfdae
