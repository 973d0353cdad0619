#pragma once

#include <cstdint>
#include <vector>

#include "gpr/tensor/tensor.hpp"

namespace gpr {

struct AdamConfig {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-6;
  double weight_decay = 0.01;
  /// false reproduces the BertAdam variant (no bias correction).
  bool bias_correction = true;
};

/// Adam with decoupled weight decay. The decay term lr * wd * param is
/// subtracted alongside the moment update and never enters the moments.
class Adam {
 public:
  Adam(const ParamSet& params, AdamConfig config);

  /// One update of every parameter from its current grad. Throws
  /// LookupError naming the first parameter without a grad.
  void step(ParamSet& params);

  std::int64_t step_count() const { return step_; }
  const AdamConfig& config() const { return config_; }
  const std::vector<Matrix>& first_moments() const { return first_; }
  const std::vector<Matrix>& second_moments() const { return second_; }

 private:
  AdamConfig config_;
  std::vector<Matrix> first_;
  std::vector<Matrix> second_;
  std::int64_t step_ = 0;
};

}  // namespace gpr
