#pragma once

#include <cstddef>
#include <span>

#include "rfdae/matrix.hpp"
#include "rfdae/model.hpp"

namespace rfdae {

// IQ (n x 2) -> [amplitude / ||amplitude||_2, atan2(Q, I) / pi].
// Throws NumericError for an all-zero sequence.
Matrix iq_to_amp_phase(const Matrix& iq);

// Averaged FFT magnitudes per carrier frequency -> n x 1 feature column, zero-padded at the
// end when the sweep is shorter than n. Throws ShapeError when the sweep is longer.
Matrix psd_features(std::span<const double> sweep, std::size_t n);

Matrix apply_transform(FeatureTransform transform, const Matrix& raw);

}  // namespace rfdae
