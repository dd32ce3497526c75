#include "dsgrl/csr.hpp"

#include <algorithm>
#include <string>

#include "dsgrl/error.hpp"

namespace dsgrl {

Matrix Csr::to_dense() const {
  Matrix d(rows, cols);
  for (index_t i = 0; i < rows; ++i)
    for (index_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p)
      d(i, col_idx[p]) = vals[p];
  return d;
}

Csr Csr::transposed() const {
  std::vector<std::tuple<index_t, index_t, double>> entries;
  entries.reserve(col_idx.size());
  for (index_t i = 0; i < rows; ++i)
    for (index_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p)
      entries.emplace_back(col_idx[p], i, vals[p]);
  return csr_from_coo(cols, rows, std::move(entries), Duplicates::Error);
}

void Csr::check() const {
  if (rows < 0 || cols < 0) throw ConsistencyError("csr: negative dimension");
  if (static_cast<index_t>(row_ptr.size()) != rows + 1)
    throw ConsistencyError("csr: row_ptr size must be rows+1");
  if (row_ptr.front() != 0 ||
      row_ptr.back() != static_cast<index_t>(col_idx.size()))
    throw ConsistencyError("csr: row_ptr endpoints invalid");
  if (col_idx.size() != vals.size())
    throw ConsistencyError("csr: col_idx/vals length mismatch");
  for (index_t i = 0; i < rows; ++i) {
    if (row_ptr[i] > row_ptr[i + 1])
      throw ConsistencyError("csr: row_ptr not monotone");
    for (index_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p) {
      if (col_idx[p] < 0 || col_idx[p] >= cols)
        throw ConsistencyError("csr: column index out of range");
      if (p > row_ptr[i] && col_idx[p] <= col_idx[p - 1])
        throw ConsistencyError("csr: columns not strictly ascending in row " +
                               std::to_string(i));
    }
  }
}

Csr csr_from_coo(index_t rows, index_t cols,
                 std::vector<std::tuple<index_t, index_t, double>> entries,
                 Duplicates dup) {
  for (const auto& [r, c, v] : entries) {
    if (r < 0 || r >= rows || c < 0 || c >= cols)
      throw RangeError("csr entry (" + std::to_string(r) + "," +
                       std::to_string(c) + ") outside " + std::to_string(rows) +
                       "x" + std::to_string(cols));
  }
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) {
              return std::get<0>(a) != std::get<0>(b)
                         ? std::get<0>(a) < std::get<0>(b)
                         : std::get<1>(a) < std::get<1>(b);
            });
  Csr s;
  s.rows = rows;
  s.cols = cols;
  s.row_ptr.assign(static_cast<std::size_t>(rows) + 1, 0);
  s.col_idx.reserve(entries.size());
  s.vals.reserve(entries.size());
  for (std::size_t k = 0; k < entries.size(); ++k) {
    auto [r, c, v] = entries[k];
    if (k > 0) {
      auto [pr, pc, pv] = entries[k - 1];
      if (pr == r && pc == c) {
        if (dup == Duplicates::Error)
          throw ConsistencyError("duplicate csr entry at (" +
                                 std::to_string(r) + "," + std::to_string(c) +
                                 ")");
        s.vals.back() += v;
        continue;
      }
    }
    s.col_idx.push_back(c);
    s.vals.push_back(v);
    s.row_ptr[static_cast<std::size_t>(r) + 1] =
        static_cast<index_t>(s.col_idx.size());
  }
  // row_ptr[i+1] currently holds the end offset only for non-empty rows;
  // propagate forward so empty rows inherit the previous offset.
  for (index_t i = 0; i < rows; ++i)
    if (s.row_ptr[i + 1] < s.row_ptr[i]) s.row_ptr[i + 1] = s.row_ptr[i];
  s.check();
  return s;
}

Matrix multiply(const Csr& s, const Matrix& x) {
  if (s.cols != x.rows()) throw ShapeError("spmm: inner dimensions differ");
  Matrix y(s.rows, x.cols());
  const index_t m = x.cols();
  for (index_t i = 0; i < s.rows; ++i) {
    double* yrow = y.data() + i * m;
    for (index_t p = s.row_ptr[i]; p < s.row_ptr[i + 1]; ++p) {
      const double v = s.vals[p];
      const double* xrow = x.data() + s.col_idx[p] * m;
      for (index_t j = 0; j < m; ++j) yrow[j] += v * xrow[j];
    }
  }
  return y;
}

Matrix multiply_transposed(const Csr& s, const Matrix& x) {
  if (s.rows != x.rows())
    throw ShapeError("spmm transpose: inner dimensions differ");
  Matrix y(s.cols, x.cols());
  const index_t m = x.cols();
  for (index_t i = 0; i < s.rows; ++i) {
    const double* xrow = x.data() + i * m;
    for (index_t p = s.row_ptr[i]; p < s.row_ptr[i + 1]; ++p) {
      const double v = s.vals[p];
      double* yrow = y.data() + s.col_idx[p] * m;
      for (index_t j = 0; j < m; ++j) yrow[j] += v * xrow[j];
    }
  }
  return y;
}

}  // namespace dsgrl
