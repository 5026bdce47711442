#include "rfdae/dropout.hpp"

#include <algorithm>

#include "rfdae/errors.hpp"

namespace rfdae {

namespace {

void check_rate(double rate) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ConfigError("dropout rate must be in [0, 1), got " + std::to_string(rate));
  }
}

}  // namespace

void dropout_inplace(const DropoutSpec& spec, std::span<double> values, std::span<double> mask,
                     Rng& rng) {
  check_rate(spec.rate);
  if (mask.size() != values.size()) throw ShapeError("dropout mask length mismatch");
  if (!spec.active()) {
    std::fill(mask.begin(), mask.end(), 1.0);
    return;
  }
  const double scale = spec.keep_scale();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const bool drop = rng.bernoulli(spec.rate);
    mask[i] = drop ? 0.0 : 1.0;
    values[i] = drop ? 0.0 : values[i] * scale;
  }
}

DropoutResult dropout_apply(const DropoutSpec& spec, const Vector& x, Rng& rng) {
  DropoutResult out{x, Vector(x.size())};
  dropout_inplace(spec, out.y.span(), out.mask.span(), rng);
  return out;
}

void dropout_backward_inplace(const DropoutSpec& spec, std::span<double> grad,
                              std::span<const double> mask) {
  if (!spec.active()) return;
  if (mask.size() != grad.size()) throw ShapeError("dropout mask length mismatch");
  const double scale = spec.keep_scale();
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] *= mask[i] * scale;
}

}  // namespace rfdae
