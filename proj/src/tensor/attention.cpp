#include "gpr/tensor/attention.hpp"

#include <cmath>

#include "gpr/tensor/errors.hpp"

namespace gpr {

Matrix xavier_uniform(Index fan_in, Index fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Matrix m(fan_in, fan_out);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = (2.0 * rng.uniform() - 1.0) * limit;
  return m;
}

AttentionParams AttentionParams::init(Index hidden, int heads, Rng& rng) {
  if (heads <= 0 || hidden % heads != 0) {
    throw ConfigError("hidden size " + std::to_string(hidden) + " is not divisible by " + std::to_string(heads) +
                      " heads");
  }
  AttentionParams p;
  p.heads = heads;
  p.query_weight = Tensor::parameter(xavier_uniform(hidden, hidden, rng), "query_weight");
  p.key_weight = Tensor::parameter(xavier_uniform(hidden, hidden, rng), "key_weight");
  p.value_weight = Tensor::parameter(xavier_uniform(hidden, hidden, rng), "value_weight");
  p.output_weight = Tensor::parameter(xavier_uniform(hidden, hidden, rng), "output_weight");
  p.query_bias = Tensor::parameter(Matrix::Zero(1, hidden), "query_bias");
  p.key_bias = Tensor::parameter(Matrix::Zero(1, hidden), "key_bias");
  p.value_bias = Tensor::parameter(Matrix::Zero(1, hidden), "value_bias");
  p.output_bias = Tensor::parameter(Matrix::Zero(1, hidden), "output_bias");
  return p;
}

AttentionParams AttentionParams::identity(Index hidden, int heads) {
  if (heads <= 0 || hidden % heads != 0) {
    throw ConfigError("hidden size " + std::to_string(hidden) + " is not divisible by " + std::to_string(heads) +
                      " heads");
  }
  AttentionParams p;
  p.heads = heads;
  for (Tensor* w : {&p.query_weight, &p.key_weight, &p.value_weight, &p.output_weight})
    *w = Tensor::parameter(Matrix::Identity(hidden, hidden), "w");
  for (Tensor* b : {&p.query_bias, &p.key_bias, &p.value_bias, &p.output_bias})
    *b = Tensor::parameter(Matrix::Zero(1, hidden), "b");
  return p;
}

void AttentionParams::collect(const std::string& prefix, ParamSet& out) const {
  out.add(prefix + "query_weight", query_weight);
  out.add(prefix + "query_bias", query_bias);
  out.add(prefix + "key_weight", key_weight);
  out.add(prefix + "key_bias", key_bias);
  out.add(prefix + "value_weight", value_weight);
  out.add(prefix + "value_bias", value_bias);
  out.add(prefix + "output_weight", output_weight);
  out.add(prefix + "output_bias", output_bias);
}

Matrix AttentionResult::mean_weights() const {
  Matrix total = Matrix::Zero(weights.front().rows(), weights.front().cols());
  for (const auto& w : weights) total += w;
  return total / static_cast<double>(weights.size());
}

AttentionResult multi_head_attention(const Tensor& query, const Tensor& key, const Tensor& value,
                                     const AttentionParams& params, const AttentionOptions& options) {
  const Index hidden = params.hidden();
  if (params.heads <= 0 || hidden % params.heads != 0) {
    throw ConfigError("hidden size " + std::to_string(hidden) + " is not divisible by " +
                      std::to_string(params.heads) + " heads");
  }
  if (query.cols() != hidden || key.cols() != hidden || value.cols() != hidden) {
    throw DimensionError("multi_head_attention: inputs must have " + std::to_string(hidden) + " columns");
  }
  if (key.rows() != value.rows()) {
    throw DimensionError("multi_head_attention: " + std::to_string(key.rows()) + " keys but " +
                         std::to_string(value.rows()) + " values");
  }
  if (options.key_mask.size() > 0 && (options.key_mask.rows() != 1 || options.key_mask.cols() != key.rows())) {
    throw DimensionError("multi_head_attention: key mask must be 1 x " + std::to_string(key.rows()));
  }
  const Index head_dim = hidden / params.heads;
  const double scale_factor = 1.0 / std::sqrt(static_cast<double>(head_dim));

  const Tensor q = affine(query, params.query_weight, params.query_bias);
  const Tensor k = affine(key, params.key_weight, params.key_bias);
  const Tensor v = affine(value, params.value_weight, params.value_bias);

  AttentionResult result;
  std::vector<Tensor> heads;
  heads.reserve(static_cast<std::size_t>(params.heads));
  for (int h = 0; h < params.heads; ++h) {
    const Index start = h * head_dim;
    const Tensor qh = slice_cols(q, start, head_dim);
    const Tensor kh = slice_cols(k, start, head_dim);
    const Tensor vh = slice_cols(v, start, head_dim);
    Tensor weights = softmax(scale(matmul(qh, transpose(kh)), scale_factor), Axis::kCols, options.key_mask);
    result.weights.push_back(weights.value());
    if (options.training && options.dropout > 0.0) {
      if (options.rng == nullptr) throw ConfigError("attention dropout in training mode needs an rng");
      weights = dropout(weights, options.dropout, true, *options.rng);
    }
    heads.push_back(matmul(weights, vh));
  }
  const Tensor joined = params.heads == 1 ? heads.front() : concat_cols(heads);
  result.output = affine(joined, params.output_weight, params.output_bias);
  return result;
}

}  // namespace gpr
