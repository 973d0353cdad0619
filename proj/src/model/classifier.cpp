#include "gpr/model/classifier.hpp"

#include "gpr/tensor/archive.hpp"
#include "gpr/tensor/errors.hpp"

namespace gpr {

std::string model_kind_name(ModelKind kind) { return kind == ModelKind::kProbert ? "probert" : "grep"; }

ModelKind parse_model_kind(const std::string& name) {
  if (name == "probert") return ModelKind::kProbert;
  if (name == "grep") return ModelKind::kGrep;
  throw ConfigError("unknown model '" + name + "' (expected probert or grep)");
}

void ModelConfig::validate() const {
  encoder.validate();
  if (encoder.hidden % grep.heads != 0) {
    throw ConfigError("hidden size " + std::to_string(encoder.hidden) + " is not divisible by " +
                      std::to_string(grep.heads) + " evidence pooling heads");
  }
}

nlohmann::json ModelConfig::to_json() const {
  return {{"kind", model_kind_name(kind)}, {"encoder", encoder.to_json()},         {"grep", grep.to_json()},
          {"head_bias", head_bias},        {"exclude_pronoun", exclude_pronoun}, {"precomputed", precomputed}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.kind = parse_model_kind(j.value("kind", "grep"));
  if (j.contains("encoder")) c.encoder = EncoderConfig::from_json(j.at("encoder"));
  if (j.contains("grep")) c.grep = GrepOptions::from_json(j.at("grep"));
  c.head_bias = j.value("head_bias", c.head_bias);
  c.exclude_pronoun = j.value("exclude_pronoun", c.exclude_pronoun);
  c.precomputed = j.value("precomputed", c.precomputed);
  c.validate();
  return c;
}

Model::Model(ModelConfig config, std::uint64_t seed) : config_(std::move(config)), seed_(seed) {
  config_.validate();
  Rng rng = Rng(seed).stream(rng_stream::kInit);
  const Index h = config_.encoder.hidden;
  encoder = EncoderParams::init(config_.encoder, rng);
  if (!config_.precomputed) encoder.collect("encoder.", config_.encoder, params_);
  if (config_.kind == ModelKind::kProbert) {
    pronoun_pool = AttnPoolParams::init(h, rng);
    probert_head = LabelHead::init(h, config_.head_bias, rng);
    pronoun_pool.collect("pronoun_pool.", params_);
    probert_head.collect("head.", params_);
  } else {
    grep = GrepParams::init(h, config_.grep, config_.head_bias, rng);
    grep.collect("grep.", config_.grep, params_);
  }
}

ParamSet Model::trainable() const {
  ParamSet out;
  for (const auto& [name, t] : params_.entries()) {
    if (t.requires_grad()) out.add(name, t);
  }
  return out;
}

Tensor Model::embed(const ModelInput& input, const ForwardOptions& options) const {
  if (input.example == nullptr) throw ConfigError("model input without an example");
  if (config_.precomputed) {
    if (input.embeddings == nullptr) {
      throw LookupError("no precomputed embeddings for sample '" + input.example->id + "'");
    }
    if (input.embeddings->cols() != config_.encoder.hidden) {
      throw DimensionError(input.example->id + ": precomputed embeddings have " +
                           std::to_string(input.embeddings->cols()) + " columns, model expects " +
                           std::to_string(config_.encoder.hidden));
    }
    if (input.embeddings->rows() != input.example->length()) {
      throw DimensionError(input.example->id + ": " + std::to_string(input.embeddings->rows()) +
                           " embedding rows for " + std::to_string(input.example->length()) + " tokens");
    }
    return Tensor(*input.embeddings);
  }
  return encode(input.example->ids, encoder, config_.encoder, {options.training, options.rng});
}

ForwardOutput Model::forward(const ModelInput& input, const ForwardOptions& options) const {
  const Tensor e = embed(input, options);
  ForwardOutput out;
  if (config_.kind == ModelKind::kProbert) {
    out.probs = classify_probert(pool_pronoun(e, input.example->mentions[0], pronoun_pool), probert_head);
    return out;
  }
  static const AlignedEvidence kNoEvidence;
  const AlignedEvidence& evidence = input.evidence ? *input.evidence : kNoEvidence;
  GrepOutput g = forward_grep(e, *input.example, evidence, grep, config_.grep, options.training, options.rng);
  out.probs = g.probs;
  out.trace = std::move(g.trace);
  return out;
}

Tensor Model::forward_batch(const std::vector<ModelInput>& inputs, const ForwardOptions& options) const {
  if (inputs.empty()) throw DimensionError("forward_batch: empty batch");
  std::vector<Tensor> rows;
  rows.reserve(inputs.size());
  for (const ModelInput& in : inputs) rows.push_back(forward(in, options).probs);
  return rows.size() == 1 ? rows.front() : concat_rows(rows);
}

void Model::save(const std::filesystem::path& path, nlohmann::json extra) const {
  nlohmann::json meta = std::move(extra);
  meta["model_config"] = config_.to_json();
  meta["config_hash"] = config_hash(meta["model_config"]);
  if (!meta.contains("seed")) meta["seed"] = seed_;
  if (!meta.contains("step")) meta["step"] = 0;
  save_checkpoint(path, params_, meta);
}

Model Model::load(const std::filesystem::path& path, nlohmann::json* metadata) {
  const Archive archive = Archive::load(path);
  if (!archive.metadata.contains("model_config")) {
    throw DataError(path.string() + ": checkpoint has no model_config");
  }
  Model model(ModelConfig::from_json(archive.metadata.at("model_config")),
              archive.metadata.value("seed", std::uint64_t{0}));
  nlohmann::json meta = load_checkpoint(path, model.params_);
  if (metadata) *metadata = std::move(meta);
  return model;
}

}  // namespace gpr
