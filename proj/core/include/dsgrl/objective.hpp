#pragma once

#include "dsgrl/augment.hpp"
#include "dsgrl/encoder.hpp"
#include "dsgrl/tensor.hpp"

namespace dsgrl {

struct LossWeights {
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1.0;
  double lambda = 1.0;
  double epsilon = 1e-4;  // variance hinge stabilizer
};

enum class LatentReg { Vic, Ortho };
enum class InvarianceForm { Frobenius, MeanSquared };

// Per-term diagnostics. Values are unweighted; total applies the weights:
//   total = alpha*inv + beta*(var1+var2) + gamma*(cov1+cov2) + lambda*model_reg
// Under LatentReg::Ortho, cov1/cov2 hold the two per-view orthonormality
// terms and var1/var2 are zero; the same reconstruction holds.
struct LossBreakdown {
  double inv = 0.0;
  double var1 = 0.0;
  double var2 = 0.0;
  double cov1 = 0.0;
  double cov2 = 0.0;
  double model_reg = 0.0;
  double total = 0.0;
  Tensor total_tensor;  // 1x1, on the active tape when recording
};

// Frobenius norm of Z1 - Z2 (not squared, not averaged).
Tensor invariance(const Tensor& z1, const Tensor& z2);

// Squared-distance variant behind a config switch: ||Z1 - Z2||_F^2 / B.
Tensor invariance_mean_squared(const Tensor& z1, const Tensor& z2);

// (1/D) sum_j max(0, 1 - sqrt(Var(z_:j) + eps)), unbiased column variance.
Tensor variance_reg(const Tensor& z, double epsilon);

// (1/D) sum of squared off-diagonals of the sample covariance of Z.
Tensor covariance_reg(const Tensor& z);

// beta*(v(Z1)+v(Z2)) + gamma*(c(Z1)+c(Z2)).
Tensor latent_reg(const Tensor& z1, const Tensor& z2, double beta, double gamma,
                  double epsilon = 1e-4);

// Sum over layers of ||W_l W_l^T - I||_F where W_l vertically stacks the
// two augmenter weight matrices of layer l.
Tensor model_reg(const FfnStack& theta1, const FfnStack& theta2);

// ||Zn Zn^T - I||_F with row-unit-normalized Zn; rejects zero rows.
Tensor orthonormality_penalty(const Tensor& z);

// Full training objective. The model term applies in the modes that carry
// the twin feature FFNs (feature, combined); topology mode must pass
// fa == nullptr. Missing augmenter in a mode that needs it is a config error.
LossBreakdown total_loss(const Tensor& z1, const Tensor& z2,
                         const FeatureAugmenter* fa, const LossWeights& w,
                         LatentReg latent = LatentReg::Vic,
                         Mode mode = Mode::Feature,
                         InvarianceForm inv_form = InvarianceForm::Frobenius);

}  // namespace dsgrl
