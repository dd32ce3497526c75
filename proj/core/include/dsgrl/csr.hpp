#pragma once

#include <tuple>
#include <vector>

#include "dsgrl/matrix.hpp"

namespace dsgrl {

// Compressed sparse row matrix. Column indices are strictly ascending within
// each row, which pins the accumulation order of every product.
struct Csr {
  index_t rows = 0;
  index_t cols = 0;
  std::vector<index_t> row_ptr;  // size rows + 1
  std::vector<index_t> col_idx;
  std::vector<double> vals;

  index_t nnz() const noexcept { return static_cast<index_t>(col_idx.size()); }

  Matrix to_dense() const;
  Csr transposed() const;

  // Structural validation: monotone row_ptr, in-range sorted unique columns.
  void check() const;
};

enum class Duplicates { Sum, Error };

// Build from unordered (row, col, value) triples.
Csr csr_from_coo(index_t rows, index_t cols,
                 std::vector<std::tuple<index_t, index_t, double>> entries,
                 Duplicates dup = Duplicates::Sum);

// y = S x, rows accumulated in stored (ascending column) order.
Matrix multiply(const Csr& s, const Matrix& x);

// y = S^T x, scatter over rows of S in ascending order.
Matrix multiply_transposed(const Csr& s, const Matrix& x);

}  // namespace dsgrl
