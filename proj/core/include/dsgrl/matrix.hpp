#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace dsgrl {

using index_t = std::int64_t;

// Dense row-major matrix of doubles. All heavy kernels live in matrix.cpp
// with fixed loop orders so results are reproducible bit-for-bit.
class Matrix {
 public:
  Matrix() = default;
  Matrix(index_t rows, index_t cols);
  Matrix(index_t rows, index_t cols, double fill);

  static Matrix identity(index_t n);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  index_t rows() const noexcept { return rows_; }
  index_t cols() const noexcept { return cols_; }
  index_t size() const noexcept { return rows_ * cols_; }

  double& operator()(index_t r, index_t c) { return data_[r * cols_ + c]; }
  double operator()(index_t r, index_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(index_t r) {
    return {data_.data() + r * cols_, static_cast<std::size_t>(cols_)};
  }
  std::span<const double> row(index_t r) const {
    return {data_.data() + r * cols_, static_cast<std::size_t>(cols_)};
  }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }

  void fill(double v);
  bool same_shape(const Matrix& o) const noexcept {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }
  bool all_finite() const noexcept;

 private:
  index_t rows_ = 0;
  index_t cols_ = 0;
  std::vector<double> data_;
};

// C = A * B, ikj order, exact zeros in A skipped. The skip keeps the
// accumulation order for each output element identical to a k-ascending
// dot product over the nonzero entries.
Matrix matmul(const Matrix& a, const Matrix& b);

Matrix transposed(const Matrix& m);

// C += A * B^T
void add_matmul_nt(Matrix& c, const Matrix& a, const Matrix& b);

// C += A^T * B
void add_matmul_tn(Matrix& c, const Matrix& a, const Matrix& b);

// y += alpha * x
void axpy(Matrix& y, double alpha, const Matrix& x);

}  // namespace dsgrl
