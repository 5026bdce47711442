#include "rfdae/features.hpp"

#include <cmath>
#include <numbers>

#include "rfdae/errors.hpp"

namespace rfdae {

Matrix iq_to_amp_phase(const Matrix& iq) {
  if (iq.cols() != 2) throw ShapeError("iq_to_amp_phase expects n x 2 input, got " + iq.shape_string());
  require_finite(iq.span(), "iq samples");
  Matrix out(iq.rows(), 2);
  double norm_sq = 0.0;
  for (std::size_t j = 0; j < iq.rows(); ++j) {
    const double amp = std::hypot(iq(j, 0), iq(j, 1));
    out(j, 0) = amp;
    out(j, 1) = std::atan2(iq(j, 1), iq(j, 0)) / std::numbers::pi;
    norm_sq += amp * amp;
  }
  if (!(norm_sq > 0.0)) {
    throw NumericError("iq_to_amp_phase: all-zero sequence has no amplitude normalization");
  }
  const double norm = std::sqrt(norm_sq);
  for (std::size_t j = 0; j < iq.rows(); ++j) out(j, 0) /= norm;
  return out;
}

Matrix psd_features(std::span<const double> sweep, std::size_t n) {
  if (sweep.empty()) throw ShapeError("psd_features: empty sweep");
  if (sweep.size() > n) {
    throw ShapeError("psd_features: sweep length " + std::to_string(sweep.size()) +
                     " exceeds sequence length " + std::to_string(n));
  }
  require_finite(sweep, "psd sweep");
  Matrix out(n, 1);
  for (std::size_t j = 0; j < sweep.size(); ++j) out(j, 0) = sweep[j];
  return out;
}

Matrix apply_transform(FeatureTransform transform, const Matrix& raw) {
  switch (transform) {
    case FeatureTransform::kNone: return raw;
    case FeatureTransform::kAmpPhase: return iq_to_amp_phase(raw);
  }
  throw ConfigError("unknown feature transform");
}

}  // namespace rfdae
