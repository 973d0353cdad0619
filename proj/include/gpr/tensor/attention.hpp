#pragma once

#include <string>
#include <vector>

#include "gpr/tensor/ops.hpp"

namespace gpr {

/// Projections of one multi-head attention block. Weights are H x H, biases
/// 1 x H.
struct AttentionParams {
  Tensor query_weight, query_bias;
  Tensor key_weight, key_bias;
  Tensor value_weight, value_bias;
  Tensor output_weight, output_bias;
  int heads = 1;

  Index hidden() const { return query_weight.rows(); }

  static AttentionParams init(Index hidden, int heads, Rng& rng);
  /// Identity projections with zero biases (useful for closed-form checks).
  static AttentionParams identity(Index hidden, int heads);
  void collect(const std::string& prefix, ParamSet& out) const;
};

struct AttentionOptions {
  /// Key positions allowed to be attended (1 x Tk); empty means all.
  Mask key_mask;
  double dropout = 0.0;
  bool training = false;
  Rng* rng = nullptr;
};

struct AttentionResult {
  Tensor output;  // Tq x H
  /// Per-head attention weights, each Tq x Tk.
  std::vector<Matrix> weights;

  Matrix mean_weights() const;
};

/// Scaled dot-product attention per head (scale 1/sqrt(H/heads)), heads
/// concatenated and passed through the output projection. No positional
/// information is added, so the result is invariant to joint permutations of
/// key/value rows.
AttentionResult multi_head_attention(const Tensor& query, const Tensor& key, const Tensor& value,
                                     const AttentionParams& params, const AttentionOptions& options = {});

/// Xavier-uniform initialization for a fan_in x fan_out weight.
Matrix xavier_uniform(Index fan_in, Index fan_out, Rng& rng);

}  // namespace gpr
