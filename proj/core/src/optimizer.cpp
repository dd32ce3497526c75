#include "dsgrl/optimizer.hpp"

#include <cmath>
#include <utility>

#include "dsgrl/error.hpp"

namespace dsgrl {

void adam_step(Matrix& param, const Matrix& grad, Matrix& m, Matrix& v,
               index_t t, const AdamConfig& cfg) {
  if (!param.same_shape(grad) || !param.same_shape(m) || !param.same_shape(v))
    throw ShapeError("adam_step: parameter/gradient/state shape mismatch");
  if (t < 1) throw RangeError("adam_step: step count starts at 1");
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  double* p = param.data();
  const double* g = grad.data();
  double* md = m.data();
  double* vd = v.data();
  const index_t n = param.size();
  for (index_t i = 0; i < n; ++i) {
    md[i] = cfg.beta1 * md[i] + (1.0 - cfg.beta1) * g[i];
    vd[i] = cfg.beta2 * vd[i] + (1.0 - cfg.beta2) * g[i] * g[i];
    double mhat = md[i] / bc1;
    double vhat = vd[i] / bc2;
    p[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
  }
}

Adam::Adam(std::vector<Tensor> params, AdamConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
  if (cfg_.lr <= 0.0) throw ConfigError("adam: learning rate must be > 0");
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const Tensor& p : params_) {
    m_.emplace_back(p.rows(), p.cols());
    v_.emplace_back(p.rows(), p.cols());
  }
}

void Adam::step() {
  ++t_;
  for (std::size_t i = 0; i < params_.size(); ++i)
    adam_step(params_[i].value_mut(), params_[i].grad(), m_[i], v_[i], t_, cfg_);
  zero_grad();
}

void Adam::zero_grad() {
  for (Tensor& p : params_) p.zero_grad();
}

}  // namespace dsgrl
