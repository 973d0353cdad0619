#include "gpr/model/grep.hpp"

#include "gpr/tensor/errors.hpp"

namespace gpr {

namespace {

std::vector<double> row_of(const Matrix& m) { return std::vector<double>(m.data(), m.data() + m.size()); }

struct StageOut {
  Tensor output;
  std::vector<double> weights;
};

StageOut run_stage(const Tensor& query, const Tensor& keys, const CascadeStage& stage,
                   const AttentionOptions& attention) {
  AttentionResult r = multi_head_attention(query, keys, keys, stage.attention, attention);
  return {tanh_affine(r.output, stage.ffn_weight, stage.ffn_bias), row_of(r.mean_weights())};
}

}  // namespace

nlohmann::json GrepOptions::to_json() const {
  return {{"heads", heads},
          {"dropout", dropout},
          {"reattend", reattend},
          {"raw_token_keys", raw_token_keys},
          {"separate_entity_pool", separate_entity_pool}};
}

GrepOptions GrepOptions::from_json(const nlohmann::json& j) {
  GrepOptions o;
  o.heads = j.value("heads", o.heads);
  o.dropout = j.value("dropout", o.dropout);
  o.reattend = j.value("reattend", o.reattend);
  o.raw_token_keys = j.value("raw_token_keys", o.raw_token_keys);
  o.separate_entity_pool = j.value("separate_entity_pool", o.separate_entity_pool);
  if (o.heads <= 0) throw ConfigError("evidence pooling needs at least one head");
  if (o.dropout < 0.0 || o.dropout >= 1.0) throw ConfigError("evidence pooling dropout outside [0,1)");
  return o;
}

GrepParams GrepParams::init(Index hidden, const GrepOptions& options, bool head_bias, Rng& rng) {
  GrepParams p;
  p.mention_pool = AttnPoolParams::init(hidden, rng);
  if (options.separate_entity_pool) p.entity_pool = AttnPoolParams::init(hidden, rng);
  for (CascadeStage& s : p.cascade) {
    s.attention = AttentionParams::init(hidden, options.heads, rng);
    s.ffn_weight = Tensor::parameter(xavier_uniform(hidden, hidden, rng), "ffn_weight");
    s.ffn_bias = Tensor::parameter(Matrix::Zero(1, hidden), "ffn_bias");
  }
  p.cluster_pool = AttnPoolParams::init(hidden, rng);
  p.provider_pool = AttnPoolParams::init(hidden, rng);
  Matrix null(1, hidden);
  for (Index i = 0; i < hidden; ++i) null(0, i) = rng.normal(0.0, 0.1);
  p.null_mention = Tensor::parameter(null, "null_mention");
  p.head = LabelHead::init(2 * hidden, head_bias, rng);
  return p;
}

void GrepParams::collect(const std::string& prefix, const GrepOptions& options, ParamSet& out) const {
  mention_pool.collect(prefix + "mention_pool.", out);
  if (options.separate_entity_pool) entity_pool.collect(prefix + "entity_pool.", out);
  for (std::size_t i = 0; i < cascade.size(); ++i) {
    const std::string sp = prefix + "cascade" + std::to_string(i) + ".";
    cascade[i].attention.collect(sp + "attention.", out);
    out.add(sp + "ffn_weight", cascade[i].ffn_weight);
    out.add(sp + "ffn_bias", cascade[i].ffn_bias);
  }
  cluster_pool.collect(prefix + "cluster_pool.", out);
  provider_pool.collect(prefix + "provider_pool.", out);
  out.add(prefix + "null_mention", null_mention);
  head.collect(prefix + "head.", out);
}

CascadeResult cascade(const Tensor& a_p, const Tensor& a_a, const Tensor& a_b, const Tensor& cluster_rows,
                      const GrepParams& params, const GrepOptions& options, const AttentionOptions& attention) {
  if (cluster_rows.rows() == 0) throw DimensionError("cascade: cluster has no rows");
  CascadeResult out;
  StageOut p = run_stage(a_p, cluster_rows, params.cascade[0], attention);
  const Tensor keys_a = options.reattend ? concat_rows({p.output, cluster_rows}) : p.output;
  StageOut a = run_stage(a_a, keys_a, params.cascade[1], attention);
  const Tensor keys_b = options.reattend ? concat_rows({a.output, cluster_rows}) : a.output;
  StageOut b = run_stage(a_b, keys_b, params.cascade[2], attention);
  out.pronoun = p.output;
  out.a = a.output;
  out.b = b.output;
  out.weights = {std::move(p.weights), std::move(a.weights), std::move(b.weights)};
  return out;
}

HierarchyResult pool_hierarchy(const std::vector<Tensor>& cluster_outputs, const GrepParams& params,
                               const std::vector<bool>& present) {
  if (!present.empty() && present.size() != cluster_outputs.size()) {
    throw DimensionError("pool_hierarchy: presence mask has " + std::to_string(present.size()) + " entries for " +
                         std::to_string(cluster_outputs.size()) + " providers");
  }
  HierarchyResult out;
  const Index h = params.hidden();
  std::vector<Tensor> rows;
  Mask mask(static_cast<Index>(cluster_outputs.size()), 1);
  bool any = false;
  for (std::size_t i = 0; i < cluster_outputs.size(); ++i) {
    PoolResult c = attn_pool(cluster_outputs[i], params.cluster_pool);
    out.cluster_row_weights.push_back(c.weights);
    out.cluster_weights.push_back(c.weights.size() == 1 ? c.weights.front() : 1.0);
    rows.push_back(c.output);
    mask(static_cast<Index>(i), 0) = present.empty() || present[i];
    any = any || mask(static_cast<Index>(i), 0);
  }
  if (!any) {
    out.pooled = Tensor(Matrix::Zero(1, h));
    out.provider_weights.assign(cluster_outputs.size(), 0.0);
    return out;
  }
  PoolResult pooled = attn_pool(concat_rows(rows), params.provider_pool, mask);
  out.pooled = pooled.output;
  out.provider_weights = std::move(pooled.weights);
  return out;
}

Tensor classify_grep(const Tensor& pronoun, const Tensor& pooled, const LabelHead& head) {
  return classify_probert(concat_cols({pronoun, pooled}), head);
}

GrepOutput forward_grep(const Tensor& embeddings, const TokenizedExample& example, const AlignedEvidence& evidence,
                        const GrepParams& params, const GrepOptions& options, bool training, Rng* rng) {
  if (embeddings.rows() != example.length()) {
    throw DimensionError("forward_grep: " + std::to_string(embeddings.rows()) + " embedding rows for " +
                         std::to_string(example.length()) + " tokens");
  }
  if (embeddings.cols() != params.hidden()) {
    throw DimensionError("forward_grep: embeddings have " + std::to_string(embeddings.cols()) +
                         " columns, model expects " + std::to_string(params.hidden()));
  }
  AttentionOptions attention;
  attention.dropout = options.dropout;
  attention.training = training;
  attention.rng = rng;

  const auto& m = example.mentions;
  const Tensor e_p = pool_mention(embeddings, m[0], params.mention_pool);
  const Tensor e_a = pool_mention(embeddings, m[1], params.mention_pool);
  const Tensor e_b = pool_mention(embeddings, m[2], params.mention_pool);
  const AttnPoolParams& entity_pool = options.separate_entity_pool ? params.entity_pool : params.mention_pool;

  GrepOutput out;
  out.trace.sample_id = example.id;
  std::vector<Tensor> cluster_outputs;
  for (const AlignedCluster& cluster : evidence.clusters) {
    ProviderTrace pt;
    pt.provider = cluster.provider;
    pt.spans = cluster.spans;
    std::vector<Tensor> rows;
    for (const TokenRange& r : cluster.mentions) {
      if (options.raw_token_keys) {
        rows.push_back(slice_rows(embeddings, r.begin, r.size()));
        pt.mention_token_weights.emplace_back(static_cast<std::size_t>(r.size()), 1.0 / r.size());
      } else {
        std::vector<double> w;
        rows.push_back(pool_mention(embeddings, r, entity_pool, &w));
        pt.mention_token_weights.push_back(std::move(w));
      }
    }
    if (rows.empty()) {
      pt.null_mention = true;
      rows.push_back(params.null_mention);
    }
    const Tensor keys = rows.size() == 1 ? rows.front() : concat_rows(rows);
    CascadeResult c = cascade(e_p, e_a, e_b, keys, params, options, attention);
    pt.stage_weights = std::move(c.weights);
    cluster_outputs.push_back(c.b);
    out.trace.providers.push_back(std::move(pt));
  }
  HierarchyResult h = pool_hierarchy(cluster_outputs, params);
  for (std::size_t i = 0; i < out.trace.providers.size(); ++i) out.trace.providers[i].weight = h.provider_weights[i];
  out.probs = classify_grep(e_p, h.pooled, params.head);
  for (int k = 0; k < 3; ++k) out.trace.probs[static_cast<std::size_t>(k)] = out.probs.value()(0, k);
  return out;
}

nlohmann::json EvidenceTrace::to_json() const {
  nlohmann::json providers_json = nlohmann::json::array();
  for (const ProviderTrace& p : providers) {
    nlohmann::json spans_json = nlohmann::json::array();
    for (const Span& s : p.spans) spans_json.push_back({{"byte_offset", s.offset}, {"byte_length", s.length}});
    providers_json.push_back({{"provider", p.provider},
                              {"weight", p.weight},
                              {"null_mention", p.null_mention},
                              {"mentions", spans_json},
                              {"mention_token_weights", p.mention_token_weights},
                              {"stage_weights",
                               {{"pronoun", p.stage_weights[0]}, {"a", p.stage_weights[1]}, {"b", p.stage_weights[2]}}}});
  }
  return {{"sample_id", sample_id},
          {"probs", {{"A", probs[0]}, {"B", probs[1]}, {"NEITHER", probs[2]}}},
          {"providers", providers_json}};
}

}  // namespace gpr
