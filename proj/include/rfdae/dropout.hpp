#pragma once

#include <span>

#include "rfdae/matrix.hpp"
#include "rfdae/rng.hpp"

namespace rfdae {

enum class Mode { kTrain, kEval };

// Inverted dropout: in Train mode survivors are scaled by 1/(1-rate); Eval is the identity.
struct DropoutSpec {
  double rate = 0.0;
  Mode mode = Mode::kEval;

  bool active() const { return mode == Mode::kTrain && rate > 0.0; }
  double keep_scale() const { return 1.0 / (1.0 - rate); }
};

struct DropoutResult {
  Vector y;
  Vector mask;  // 1 for kept units, 0 for dropped ones
};

DropoutResult dropout_apply(const DropoutSpec& spec, const Vector& x, Rng& rng);

// In-place form: draws a 0/1 mask into `mask` and scales/zeroes `values`.
void dropout_inplace(const DropoutSpec& spec, std::span<double> values, std::span<double> mask,
                     Rng& rng);

// Backward through a recorded mask: grad[i] *= mask[i] / (1 - rate).
void dropout_backward_inplace(const DropoutSpec& spec, std::span<double> grad,
                              std::span<const double> mask);

}  // namespace rfdae
