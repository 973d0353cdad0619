#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "gpr/tensor/attention.hpp"

namespace gpr {

struct EncoderConfig {
  int vocab_size = 2000;
  Index hidden = 64;
  int layers = 2;
  int heads = 4;
  Index max_length = 256;
  /// Inner width of the position-wise feed-forward block; 0 means 2 * hidden.
  Index ffn_hidden = 0;
  double dropout = 0.1;
  bool layer_norm = true;
  /// Embeddings plus this many lowest blocks are frozen (0 trains everything).
  int freeze_depth = 0;

  Index ffn_width() const { return ffn_hidden > 0 ? ffn_hidden : 2 * hidden; }
  /// Throws ConfigError on hidden % heads != 0 or nonpositive sizes.
  void validate() const;
  nlohmann::json to_json() const;
  static EncoderConfig from_json(const nlohmann::json& j);
};

struct EncoderBlock {
  AttentionParams attention;
  Tensor attention_norm_gain, attention_norm_bias;
  Tensor ffn_in_weight, ffn_in_bias;
  Tensor ffn_out_weight, ffn_out_bias;
  Tensor ffn_norm_gain, ffn_norm_bias;
};

struct EncoderParams {
  Tensor token_embedding;     // vocab x H
  Tensor position_embedding;  // max_length x H
  Tensor embedding_norm_gain, embedding_norm_bias;
  std::vector<EncoderBlock> blocks;

  /// Token embeddings ~ N(0, 0.5); positions start from the sinusoidal
  /// table (scaled by 0.5) and are trained like any other weight.
  static EncoderParams init(const EncoderConfig& config, Rng& rng);
  /// Registers every tensor; frozen ones are registered with requires_grad
  /// off so checkpoints stay complete.
  void collect(const std::string& prefix, const EncoderConfig& config, ParamSet& out) const;
};

struct EncodeOptions {
  bool training = false;
  Rng* rng = nullptr;
};

/// Per-token embeddings E (T x H) of a token id sequence.
Tensor encode(const std::vector<int>& ids, const EncoderParams& params, const EncoderConfig& config,
              const EncodeOptions& options = {});

/// Sinusoidal position table (rows x H).
Matrix sinusoidal_positions(Index rows, Index hidden);

}  // namespace gpr
