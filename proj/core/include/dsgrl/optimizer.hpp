#pragma once

#include <vector>

#include "dsgrl/tensor.hpp"

namespace dsgrl {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// One bias-corrected Adam update on a single parameter. `t` counts steps
// starting at 1.
void adam_step(Matrix& param, const Matrix& grad, Matrix& m, Matrix& v,
               index_t t, const AdamConfig& cfg);

class Adam {
 public:
  Adam(std::vector<Tensor> params, AdamConfig cfg);

  // Applies one update from the accumulated gradients, then clears them.
  void step();
  void zero_grad();
  index_t steps_taken() const noexcept { return t_; }

 private:
  std::vector<Tensor> params_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  AdamConfig cfg_;
  index_t t_ = 0;
};

}  // namespace dsgrl
