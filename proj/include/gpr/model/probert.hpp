#pragma once

#include <string>

#include "gpr/data/tokenizer.hpp"
#include "gpr/model/pooling.hpp"

namespace gpr {

/// Linear softmax head over {A, B, NEITHER}.
struct LabelHead {
  Tensor weight;  // in x 3
  Tensor bias;    // 1 x 3, undefined when disabled

  static LabelHead init(Index in, bool with_bias, Rng& rng);
  bool has_bias() const { return bias.defined(); }
  void collect(const std::string& prefix, ParamSet& out) const;
};

/// E_p: the pronoun token row verbatim, or an AttnPool over the range when
/// the pronoun spans several tokens.
Tensor pool_pronoun(const Tensor& embeddings, const TokenRange& range, const AttnPoolParams& pool);

/// Mention embedding for any role; same rule as pool_pronoun. Fills
/// `weights` with the token weights when given.
Tensor pool_mention(const Tensor& embeddings, const TokenRange& range, const AttnPoolParams& pool,
                    std::vector<double>* weights = nullptr);

/// softmax(x W + b) as a 1 x 3 row.
Tensor classify_probert(const Tensor& pronoun, const LabelHead& head);

}  // namespace gpr
