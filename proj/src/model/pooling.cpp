#include "gpr/model/pooling.hpp"

#include "gpr/tensor/errors.hpp"

namespace gpr {

AttnPoolParams AttnPoolParams::init(Index hidden, Rng& rng) {
  AttnPoolParams p;
  p.weight = Tensor::parameter(xavier_uniform(hidden, hidden, rng), "pool_weight");
  p.bias = Tensor::parameter(Matrix::Zero(1, hidden), "pool_bias");
  p.query = Tensor::parameter(xavier_uniform(hidden, 1, rng), "pool_query");
  return p;
}

void AttnPoolParams::collect(const std::string& prefix, ParamSet& out) const {
  out.add(prefix + "weight", weight);
  out.add(prefix + "bias", bias);
  out.add(prefix + "query", query);
}

PoolResult attn_pool(const Tensor& x, const AttnPoolParams& params, const Mask& mask) {
  if (x.rows() == 0) throw DimensionError("attn_pool: no rows to pool");
  if (x.cols() != params.hidden()) {
    throw DimensionError("attn_pool: input has " + std::to_string(x.cols()) + " columns, pool expects " +
                         std::to_string(params.hidden()));
  }
  if (mask.size() > 0 && (mask.rows() != x.rows() || mask.cols() != 1)) {
    throw DimensionError("attn_pool: mask must be " + std::to_string(x.rows()) + " x 1");
  }
  const Tensor scores = matmul(tanh_affine(x, params.weight, params.bias), params.query);  // T x 1
  const Tensor weights = softmax(scores, Axis::kRows, mask);
  PoolResult out;
  out.output = matmul(transpose(weights), x);
  out.weights.assign(weights.value().data(), weights.value().data() + weights.size());
  return out;
}

}  // namespace gpr
