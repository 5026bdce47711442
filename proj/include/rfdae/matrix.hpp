#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace rfdae {

// Dense vector of doubles. Used for every bias and activation vector.
class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t len, double fill = 0.0) : data_(len, fill) {}
  Vector(std::initializer_list<double> values) : data_(values) {}
  explicit Vector(std::vector<double> values) : data_(std::move(values)) {}

  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  std::span<double> span() { return data_; }
  std::span<const double> span() const { return data_; }

  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }
  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }

  void fill(double value);
  const std::vector<double>& values() const { return data_; }

  friend bool operator==(const Vector&, const Vector&) = default;

 private:
  std::vector<double> data_;
};

// Row-major dense matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  std::span<double> span() { return data_; }
  std::span<const double> span() const { return data_; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  void fill(double value);
  std::string shape_string() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Rank and dimensions of a parameter tensor (rank 1: rows = length, cols = 1).
struct TensorShape {
  std::size_t rank = 2;
  std::size_t rows = 0;
  std::size_t cols = 0;

  static TensorShape of(const Matrix& m) { return {2, m.rows(), m.cols()}; }
  static TensorShape of(const Vector& v) { return {1, v.size(), 1}; }
  std::size_t size() const { return rows * cols; }
  friend bool operator==(const TensorShape&, const TensorShape&) = default;
};

// Standard product. Summation runs left to right over the shared dimension.
Matrix matmul(const Matrix& a, const Matrix& b);

// y = a * x
Vector matvec(const Matrix& a, const Vector& x);

// Throws NumericError naming `what` if any element is NaN or infinite.
void require_finite(std::span<const double> values, const std::string& what);

namespace kernels {

// Raw kernels used on the training hot path. No shape checks; callers guarantee sizes.

// out[r] += sum_c a(r, c) * x[c], for a stored row-major rows x cols.
void gemv_acc(const double* a, std::size_t rows, std::size_t cols, const double* x, double* out);

// out[c] += sum_r a(r, c) * y[r]  (transpose product)
void gemv_t_acc(const double* a, std::size_t rows, std::size_t cols, const double* y, double* out);

// a(r, c) += y[r] * x[c]
void outer_acc(double* a, std::size_t rows, std::size_t cols, const double* y, const double* x);

}  // namespace kernels

}  // namespace rfdae
