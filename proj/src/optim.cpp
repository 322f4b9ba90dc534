#include "yaware/optim.hpp"

#include <cmath>

#include "yaware/errors.hpp"

namespace yaware {

void AdamConfig::validate() const {
  if (!(beta1 >= 0.0 && beta1 < 1.0))
    throw ParameterError("adam beta1 must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0))
    throw ParameterError("adam beta2 must lie in [0, 1)");
  if (!(eps > 0.0)) throw ParameterError("adam eps must be positive");
}

Adam::Adam(const std::vector<ParamArray>& arrays, AdamConfig cfg) {
  init(arrays, cfg);
}

void Adam::init(const std::vector<ParamArray>& arrays, AdamConfig cfg) {
  cfg.validate();
  cfg_ = cfg;
  t_ = 0;
  m_.clear();
  v_.clear();
  for (const auto& a : arrays) {
    m_.emplace_back(a.size(), 0.0);
    v_.emplace_back(a.size(), 0.0);
  }
  initialized_ = true;
}

void Adam::step(std::vector<ParamArray>& arrays, double lr) {
  if (!initialized_)
    throw StateError("adam step on uninitialized optimizer state");
  if (arrays.size() != m_.size())
    throw StateError("adam state does not match the parameter list");
  for (std::size_t i = 0; i < arrays.size(); ++i)
    if (arrays[i].size() != m_[i].size())
      throw StateError("adam state shape mismatch for array " +
                       arrays[i].name);

  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
  const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
  for (std::size_t i = 0; i < arrays.size(); ++i) {
    auto& value = arrays[i].value;
    auto& grad = arrays[i].grad;
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < value.size(); ++j) {
      double g = grad[j];
      m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * g;
      v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * g * g;
      double m_hat = m[j] / bc1;
      double v_hat = v[j] / bc2;
      value[j] -= lr * m_hat / (std::sqrt(v_hat) + cfg_.eps);
      grad[j] = 0.0;
    }
  }
}

double lr_at_epoch(double base_lr, double decay, int every, int epoch) {
  if (epoch < 0) throw ParameterError("epoch must be nonnegative");
  if (every < 1) throw ParameterError("decay interval must be positive");
  double lr = base_lr;
  for (int i = 0; i < epoch / every; ++i) lr *= decay;
  return lr;
}

}  // namespace yaware
