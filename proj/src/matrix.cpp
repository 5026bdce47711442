#include "rfdae/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "rfdae/errors.hpp"

namespace rfdae {

void Vector::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  if (data_.size() != rows_ * cols_) {
    throw ShapeError("matrix data length " + std::to_string(data_.size()) + " does not match " +
                     shape_string());
  }
  require_finite(data_, "matrix data");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ShapeError("ragged matrix initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
  require_finite(data_, "matrix data");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void Matrix::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

std::string Matrix::shape_string() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul shape mismatch: " + a.shape_string() + " * " + b.shape_string());
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      out(i, j) = acc;
    }
  }
  require_finite(out.span(), "matmul result");
  return out;
}

Vector matvec(const Matrix& a, const Vector& x) {
  if (a.cols() != x.size()) {
    throw ShapeError("matvec shape mismatch: " + a.shape_string() + " * " +
                     std::to_string(x.size()));
  }
  Vector out(a.rows());
  kernels::gemv_acc(a.data(), a.rows(), a.cols(), x.data(), out.data());
  require_finite(out.span(), "matvec result");
  return out;
}

void require_finite(std::span<const double> values, const std::string& what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw NumericError(what + ": non-finite value at index " + std::to_string(i));
    }
  }
}

namespace kernels {

// Four interleaved partial sums let the compiler vectorize the reduction; the summation order is
// fixed, so results are reproducible.
void gemv_acc(const double* a, std::size_t rows, std::size_t cols, const double* x, double* out) {
  const std::size_t blocked = cols - cols % 4;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = a + r * cols;
    double acc[4] = {0.0, 0.0, 0.0, 0.0};
    for (std::size_t c = 0; c < blocked; c += 4) {
      acc[0] += row[c] * x[c];
      acc[1] += row[c + 1] * x[c + 1];
      acc[2] += row[c + 2] * x[c + 2];
      acc[3] += row[c + 3] * x[c + 3];
    }
    double tail = 0.0;
    for (std::size_t c = blocked; c < cols; ++c) tail += row[c] * x[c];
    out[r] += ((acc[0] + acc[1]) + (acc[2] + acc[3])) + tail;
  }
}

void gemv_t_acc(const double* a, std::size_t rows, std::size_t cols, const double* y, double* out) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = a + r * cols;
    const double yr = y[r];
    for (std::size_t c = 0; c < cols; ++c) out[c] += row[c] * yr;
  }
}

void outer_acc(double* a, std::size_t rows, std::size_t cols, const double* y, const double* x) {
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = a + r * cols;
    const double yr = y[r];
    for (std::size_t c = 0; c < cols; ++c) row[c] += yr * x[c];
  }
}

}  // namespace kernels

}  // namespace rfdae
