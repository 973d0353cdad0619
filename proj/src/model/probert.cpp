#include "gpr/model/probert.hpp"

#include "gpr/tensor/errors.hpp"

namespace gpr {

LabelHead LabelHead::init(Index in, bool with_bias, Rng& rng) {
  LabelHead h;
  h.weight = Tensor::parameter(xavier_uniform(in, 3, rng), "label_weight");
  if (with_bias) h.bias = Tensor::parameter(Matrix::Zero(1, 3), "label_bias");
  return h;
}

void LabelHead::collect(const std::string& prefix, ParamSet& out) const {
  out.add(prefix + "weight", weight);
  if (has_bias()) out.add(prefix + "bias", bias);
}

Tensor pool_mention(const Tensor& embeddings, const TokenRange& range, const AttnPoolParams& pool,
                    std::vector<double>* weights) {
  if (range.empty() || range.begin < 0 || range.end > embeddings.rows()) {
    throw DimensionError("mention range [" + std::to_string(range.begin) + "," + std::to_string(range.end) +
                         ") outside " + std::to_string(embeddings.rows()) + " tokens");
  }
  const Tensor rows = slice_rows(embeddings, range.begin, range.size());
  if (range.size() == 1) {
    if (weights) *weights = {1.0};
    return rows;
  }
  PoolResult pooled = attn_pool(rows, pool);
  if (weights) *weights = std::move(pooled.weights);
  return pooled.output;
}

Tensor pool_pronoun(const Tensor& embeddings, const TokenRange& range, const AttnPoolParams& pool) {
  return pool_mention(embeddings, range, pool);
}

Tensor classify_probert(const Tensor& pronoun, const LabelHead& head) {
  if (pronoun.rows() != 1 || pronoun.cols() != head.weight.rows()) {
    throw DimensionError("classifier input must be 1 x " + std::to_string(head.weight.rows()));
  }
  const Tensor logits = head.has_bias() ? affine(pronoun, head.weight, head.bias) : matmul(pronoun, head.weight);
  return softmax(logits);
}

}  // namespace gpr
