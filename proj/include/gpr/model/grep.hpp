#pragma once

#include <array>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpr/evidence/alignment.hpp"
#include "gpr/model/probert.hpp"

namespace gpr {

struct GrepOptions {
  int heads = 4;
  double dropout = 0.1;
  /// Stages 2 and 3 attend over [previous stage; cluster mentions] instead
  /// of the previous stage alone.
  bool reattend = false;
  /// Cascade keys are the raw cluster token rows rather than pooled mentions.
  bool raw_token_keys = false;
  /// Cluster mentions get their own AttnPool instead of sharing the P/A/B one.
  bool separate_entity_pool = false;

  nlohmann::json to_json() const;
  static GrepOptions from_json(const nlohmann::json& j);
};

/// MH attention followed by tanh(x W + b).
struct CascadeStage {
  AttentionParams attention;
  Tensor ffn_weight, ffn_bias;
};

struct GrepParams {
  AttnPoolParams mention_pool;
  AttnPoolParams entity_pool;  // only used with separate_entity_pool
  std::array<CascadeStage, 3> cascade;
  AttnPoolParams cluster_pool;
  AttnPoolParams provider_pool;
  Tensor null_mention;  // 1 x H, stands in for a cluster whose mentions were all dropped
  LabelHead head;       // 2H x 3

  static GrepParams init(Index hidden, const GrepOptions& options, bool head_bias, Rng& rng);
  Index hidden() const { return null_mention.cols(); }
  void collect(const std::string& prefix, const GrepOptions& options, ParamSet& out) const;
};

struct CascadeResult {
  Tensor pronoun, a, b;                  // C_p, C_a, C_b (1 x H each)
  std::array<std::vector<double>, 3> weights;  // head-averaged attention per stage
};

/// Runs the P -> A -> B cascade over one cluster's key rows.
CascadeResult cascade(const Tensor& a_p, const Tensor& a_a, const Tensor& a_b, const Tensor& cluster_rows,
                      const GrepParams& params, const GrepOptions& options, const AttentionOptions& attention = {});

struct HierarchyResult {
  Tensor pooled;                         // A_co (1 x H), zeros when no provider is present
  std::vector<double> cluster_weights;   // per provider: weights over that provider's cascade rows
  std::vector<std::vector<double>> cluster_row_weights;
  std::vector<double> provider_weights;  // over providers, zero where absent
};

/// Cluster-level then provider-level AttnPool. `present` (empty = all) masks
/// padding providers.
HierarchyResult pool_hierarchy(const std::vector<Tensor>& cluster_outputs, const GrepParams& params,
                               const std::vector<bool>& present = {});

/// softmax([E_p ; A_co] W + b).
Tensor classify_grep(const Tensor& pronoun, const Tensor& pooled, const LabelHead& head);

struct ProviderTrace {
  std::string provider;
  bool null_mention = false;
  std::vector<Span> spans;
  std::vector<std::vector<double>> mention_token_weights;
  std::array<std::vector<double>, 3> stage_weights;
  double weight = 0.0;
};

struct EvidenceTrace {
  std::string sample_id;
  std::array<double, 3> probs{};
  std::vector<ProviderTrace> providers;

  nlohmann::json to_json() const;
};

struct GrepOutput {
  Tensor probs;  // 1 x 3
  EvidenceTrace trace;
};

/// Full evidence-pooling forward pass over encoded tokens E (T x H).
GrepOutput forward_grep(const Tensor& embeddings, const TokenizedExample& example, const AlignedEvidence& evidence,
                        const GrepParams& params, const GrepOptions& options, bool training = false,
                        Rng* rng = nullptr);

}  // namespace gpr
