#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpr/model/encoder.hpp"
#include "gpr/model/grep.hpp"

namespace gpr {

enum class ModelKind { kProbert, kGrep };

std::string model_kind_name(ModelKind kind);
/// "probert" | "grep"; throws ConfigError otherwise.
ModelKind parse_model_kind(const std::string& name);

struct ModelConfig {
  ModelKind kind = ModelKind::kGrep;
  EncoderConfig encoder;
  GrepOptions grep;
  bool head_bias = true;
  /// Drop the labeled pronoun's own span from evidence clusters.
  bool exclude_pronoun = false;
  /// Bypass the encoder and read frozen embeddings.
  bool precomputed = false;

  void validate() const;
  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
};

/// One sample ready for the forward pass.
struct ModelInput {
  const TokenizedExample* example = nullptr;
  const AlignedEvidence* evidence = nullptr;  // ignored by ProBERT; null means N = 0
  const Matrix* embeddings = nullptr;         // required when config.precomputed
};

struct ForwardOptions {
  bool training = false;
  Rng* rng = nullptr;
};

struct ForwardOutput {
  Tensor probs;  // 1 x 3
  std::optional<EvidenceTrace> trace;
};

class Model {
 public:
  Model(ModelConfig config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  /// Every tensor, frozen ones included (checkpoint order).
  const ParamSet& params() const { return params_; }
  ParamSet& params() { return params_; }
  /// Parameters the optimizer updates.
  ParamSet trainable() const;

  Tensor embed(const ModelInput& input, const ForwardOptions& options = {}) const;
  ForwardOutput forward(const ModelInput& input, const ForwardOptions& options = {}) const;
  /// B x 3 probabilities, samples processed independently.
  Tensor forward_batch(const std::vector<ModelInput>& inputs, const ForwardOptions& options = {}) const;

  /// Checkpoint with metadata {model_config, config_hash, seed, step, ...extra}.
  void save(const std::filesystem::path& path, nlohmann::json extra = nlohmann::json::object()) const;
  /// Restores config and weights; `metadata` receives the archive metadata.
  static Model load(const std::filesystem::path& path, nlohmann::json* metadata = nullptr);

  EncoderParams encoder;
  AttnPoolParams pronoun_pool;  // ProBERT only
  LabelHead probert_head;       // ProBERT only
  GrepParams grep;              // GREP only

 private:
  ModelConfig config_;
  std::uint64_t seed_;
  ParamSet params_;
};

}  // namespace gpr
