#include "dsgrl/objective.hpp"

#include <cmath>
#include <string>

#include "dsgrl/error.hpp"

namespace dsgrl {

Tensor invariance(const Tensor& z1, const Tensor& z2) {
  return frobenius_norm(subtract(z1, z2));
}

Tensor invariance_mean_squared(const Tensor& z1, const Tensor& z2) {
  Tensor d = subtract(z1, z2);
  return scale(sum_all(square(d)), 1.0 / static_cast<double>(z1.rows()));
}

Tensor variance_reg(const Tensor& z, double epsilon) {
  if (epsilon <= 0.0) throw ConfigError("variance_reg: epsilon must be > 0");
  const double d = static_cast<double>(z.cols());
  Tensor stdev = sqrt(add_scalar(column_variance(z), epsilon));
  Tensor shortfall = max_with(add_scalar(scale(stdev, -1.0), 1.0), 0.0);
  return scale(row_sum(shortfall), 1.0 / d);
}

Tensor covariance_reg(const Tensor& z) {
  const index_t b = z.rows(), d = z.cols();
  if (b < 2)
    throw DegenerateError("covariance_reg needs at least two rows, got " +
                          std::to_string(b));
  Tensor centered = mean_center_columns(z);
  Tensor cov = scale(matmul(transpose(centered), centered),
                     1.0 / static_cast<double>(b - 1));
  Matrix off_diag(d, d, 1.0);
  for (index_t i = 0; i < d; ++i) off_diag(i, i) = 0.0;
  return scale(sum_all(square(mask(cov, off_diag))), 1.0 / static_cast<double>(d));
}

Tensor latent_reg(const Tensor& z1, const Tensor& z2, double beta, double gamma,
                  double epsilon) {
  Tensor v = add(variance_reg(z1, epsilon), variance_reg(z2, epsilon));
  Tensor c = add(covariance_reg(z1), covariance_reg(z2));
  return add(scale(v, beta), scale(c, gamma));
}

Tensor model_reg(const FfnStack& theta1, const FfnStack& theta2) {
  if (theta1.weights.size() != theta2.weights.size())
    throw ShapeError("model_reg: stacks have different depths");
  Tensor total;
  for (std::size_t l = 0; l < theta1.weights.size(); ++l) {
    const Tensor& w1 = theta1.weights[l];
    const Tensor& w2 = theta2.weights[l];
    if (!w1.value().same_shape(w2.value()))
      throw ShapeError("model_reg: layer " + std::to_string(l) +
                       " shapes differ between the two stacks");
    Tensor stacked = concat_rows(w1, w2);
    Tensor gram = matmul(stacked, transpose(stacked));
    Tensor diff = subtract(gram, Tensor(Matrix::identity(stacked.rows())));
    Tensor term = frobenius_norm(diff);
    total = total.defined() ? add(total, term) : term;
  }
  if (!total.defined()) throw ConfigError("model_reg: empty stacks");
  return total;
}

Tensor orthonormality_penalty(const Tensor& z) {
  const Matrix& v = z.value();
  for (index_t i = 0; i < v.rows(); ++i) {
    double s = 0.0;
    for (index_t j = 0; j < v.cols(); ++j) s += v(i, j) * v(i, j);
    if (s == 0.0)
      throw DegenerateError("orthonormality penalty: zero row " +
                            std::to_string(i) + " cannot be unit-normalized");
  }
  Tensor zn = row_l2_normalize(z);
  Tensor gram = matmul(zn, transpose(zn));
  Tensor diff = subtract(gram, Tensor(Matrix::identity(z.rows())));
  return frobenius_norm(diff);
}

LossBreakdown total_loss(const Tensor& z1, const Tensor& z2,
                         const FeatureAugmenter* fa, const LossWeights& w,
                         LatentReg latent, Mode mode, InvarianceForm inv_form) {
  if (!z1.value().same_shape(z2.value()))
    throw ShapeError("total_loss: view embeddings differ in shape");
  const bool wants_model = mode == Mode::Feature || mode == Mode::Combined;
  if (wants_model && !fa)
    throw ConfigError("total_loss: this mode regularizes the feature "
                      "augmenter, but none was given");
  if (!wants_model && fa)
    throw ConfigError("total_loss: topology mode has no feature augmenter; "
                      "pass none");

  LossBreakdown out;
  Tensor inv_t = inv_form == InvarianceForm::Frobenius
                     ? invariance(z1, z2)
                     : invariance_mean_squared(z1, z2);
  out.inv = inv_t.value()(0, 0);
  Tensor total = scale(inv_t, w.alpha);

  if (latent == LatentReg::Vic) {
    Tensor v1 = variance_reg(z1, w.epsilon);
    Tensor v2 = variance_reg(z2, w.epsilon);
    Tensor c1 = covariance_reg(z1);
    Tensor c2 = covariance_reg(z2);
    out.var1 = v1.value()(0, 0);
    out.var2 = v2.value()(0, 0);
    out.cov1 = c1.value()(0, 0);
    out.cov2 = c2.value()(0, 0);
    total = add(total, scale(add(v1, v2), w.beta));
    total = add(total, scale(add(c1, c2), w.gamma));
  } else {
    Tensor o1 = orthonormality_penalty(z1);
    Tensor o2 = orthonormality_penalty(z2);
    out.cov1 = o1.value()(0, 0);
    out.cov2 = o2.value()(0, 0);
    total = add(total, scale(add(o1, o2), w.gamma));
  }

  if (wants_model) {
    Tensor m = model_reg(fa->f1, fa->f2);
    out.model_reg = m.value()(0, 0);
    total = add(total, scale(m, w.lambda));
  }

  out.total = total.value()(0, 0);
  out.total_tensor = total;
  return out;
}

}  // namespace dsgrl
