#pragma once

#include <string>
#include <vector>

#include "gpr/tensor/attention.hpp"

namespace gpr {

/// Self-attentive pooling: s_i = u . tanh(W x_i + b), weights = softmax(s).
struct AttnPoolParams {
  Tensor weight;  // H x H
  Tensor bias;    // 1 x H
  Tensor query;   // H x 1 (u)

  static AttnPoolParams init(Index hidden, Rng& rng);
  Index hidden() const { return weight.rows(); }
  void collect(const std::string& prefix, ParamSet& out) const;
};

struct PoolResult {
  Tensor output;                // 1 x H
  std::vector<double> weights;  // one per input row, zero where masked
};

/// Weighted sum of the rows of `x` (T x H). `mask` (T x 1 or empty) removes
/// rows; an all-false mask throws DegenerateMaskError.
PoolResult attn_pool(const Tensor& x, const AttnPoolParams& params, const Mask& mask = Mask());

}  // namespace gpr
