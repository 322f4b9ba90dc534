#pragma once

#include <vector>

#include "yaware/model.hpp"

namespace yaware {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const;
};

// Standard bias-corrected Adam over a list of parameter arrays. step() applies
// the update in declaration order and zeroes the gradients afterwards.
class Adam {
 public:
  Adam() = default;
  Adam(const std::vector<ParamArray>& arrays, AdamConfig cfg);

  void init(const std::vector<ParamArray>& arrays, AdamConfig cfg);
  void step(std::vector<ParamArray>& arrays, double lr);
  int step_count() const { return t_; }

 private:
  bool initialized_ = false;
  AdamConfig cfg_;
  int t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

// base_lr * decay^floor(epoch / every). Computed by repeated multiplication,
// so e.g. 1e-4 with decay 0.9 gives exactly 8.1e-5 at epoch 25.
double lr_at_epoch(double base_lr, double decay, int every, int epoch);

}  // namespace yaware
