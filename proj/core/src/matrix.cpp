#include "dsgrl/matrix.hpp"

#include <cmath>

#include "dsgrl/error.hpp"

namespace dsgrl {

Matrix::Matrix(index_t rows, index_t cols)
    : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows * cols), 0.0) {
  if (rows < 0 || cols < 0) throw ShapeError("negative matrix dimension");
}

Matrix::Matrix(index_t rows, index_t cols, double fill)
    : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows * cols), fill) {
  if (rows < 0 || cols < 0) throw ShapeError("negative matrix dimension");
}

Matrix Matrix::identity(index_t n) {
  Matrix m(n, n);
  for (index_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  index_t r = static_cast<index_t>(rows.size());
  index_t c = r > 0 ? static_cast<index_t>(rows.begin()->size()) : 0;
  Matrix m(r, c);
  index_t i = 0;
  for (const auto& row : rows) {
    if (static_cast<index_t>(row.size()) != c)
      throw ShapeError("ragged initializer rows");
    index_t j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

void Matrix::fill(double v) {
  for (auto& x : data_) x = v;
}

bool Matrix::all_finite() const noexcept {
  for (double x : data_)
    if (!std::isfinite(x)) return false;
  return true;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw ShapeError("matmul: inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  const index_t n = a.rows(), k = a.cols(), m = b.cols();
  for (index_t i = 0; i < n; ++i) {
    const double* arow = a.data() + i * k;
    double* crow = c.data() + i * m;
    for (index_t p = 0; p < k; ++p) {
      double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = b.data() + p * m;
      for (index_t j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
  return c;
}

Matrix transposed(const Matrix& m) {
  Matrix t(m.cols(), m.rows());
  for (index_t i = 0; i < m.rows(); ++i)
    for (index_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
  return t;
}

void add_matmul_nt(Matrix& c, const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols() || c.rows() != a.rows() || c.cols() != b.rows())
    throw ShapeError("add_matmul_nt: shape mismatch");
  const index_t n = a.rows(), k = a.cols(), m = b.rows();
  for (index_t i = 0; i < n; ++i) {
    const double* arow = a.data() + i * k;
    double* crow = c.data() + i * m;
    for (index_t j = 0; j < m; ++j) {
      const double* brow = b.data() + j * k;
      double s = 0.0;
      for (index_t p = 0; p < k; ++p) s += arow[p] * brow[p];
      crow[j] += s;
    }
  }
}

void add_matmul_tn(Matrix& c, const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || c.rows() != a.cols() || c.cols() != b.cols())
    throw ShapeError("add_matmul_tn: shape mismatch");
  const index_t n = a.rows(), k = a.cols(), m = b.cols();
  for (index_t p = 0; p < n; ++p) {
    const double* arow = a.data() + p * k;
    const double* brow = b.data() + p * m;
    for (index_t i = 0; i < k; ++i) {
      double av = arow[i];
      if (av == 0.0) continue;
      double* crow = c.data() + i * m;
      for (index_t j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
}

void axpy(Matrix& y, double alpha, const Matrix& x) {
  if (!y.same_shape(x)) throw ShapeError("axpy: shape mismatch");
  double* yd = y.data();
  const double* xd = x.data();
  const index_t n = y.size();
  for (index_t i = 0; i < n; ++i) yd[i] += alpha * xd[i];
}

}  // namespace dsgrl
