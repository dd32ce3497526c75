#pragma once

#include <memory>
#include <vector>

#include "dsgrl/tensor.hpp"

namespace dsgrl {

struct Csr;

// Differentiable operations. Each builds its result from input values and,
// when a tape is active and any input is connected to it, records a closure
// that scatters the output gradient back into the inputs.

Tensor matmul(const Tensor& a, const Tensor& b);

// Sparse-dense product with a constant left factor (no gradient into `a`).
Tensor spmm(std::shared_ptr<const Csr> a, const Tensor& x);

Tensor add(const Tensor& a, const Tensor& b);
Tensor subtract(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double s);
Tensor hadamard(const Tensor& a, const Tensor& b);

// Elementwise product with a constant 0/1 (or arbitrary) matrix.
Tensor mask(const Tensor& a, const Matrix& m);

Tensor transpose(const Tensor& a);
Tensor relu(const Tensor& a);

// max(x, c) elementwise; gradient passes only where x > c strictly.
Tensor max_with(const Tensor& a, double c);

Tensor sqrt(const Tensor& a);
Tensor square(const Tensor& a);
Tensor reciprocal(const Tensor& a);

Tensor row_sum(const Tensor& a);   // N x 1
Tensor sum_all(const Tensor& a);   // 1 x 1

// Subtract the column mean from every row.
Tensor mean_center_columns(const Tensor& a);

// Rows rescaled to unit L2 norm; zero rows stay zero and get no gradient.
Tensor row_l2_normalize(const Tensor& a);

// Unbiased per-column variance, 1 x D. Needs at least two rows.
Tensor column_variance(const Tensor& a);

Tensor frobenius_norm(const Tensor& a);  // 1 x 1

// y_ij = x_ij * v_i with v of shape rows x 1.
Tensor scale_rows(const Tensor& x, const Tensor& v);

// y_ij = x_ij * v_j with v of shape cols x 1.
Tensor scale_cols(const Tensor& x, const Tensor& v);

Tensor concat_cols(const Tensor& a, const Tensor& b);
Tensor concat_rows(const Tensor& a, const Tensor& b);

// y has one row per index; gradients accumulate into the gathered rows,
// so repeated indices sum.
Tensor gather_rows(const Tensor& a, std::vector<index_t> idx);

}  // namespace dsgrl
