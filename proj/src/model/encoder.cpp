#include "gpr/model/encoder.hpp"

#include <cmath>

#include "gpr/tensor/errors.hpp"

namespace gpr {

namespace {

Tensor maybe_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, bool on) {
  return on ? layer_norm(x, gain, bias) : x;
}

Matrix normal_matrix(Index rows, Index cols, double stddev, Rng& rng) {
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal(0.0, stddev);
  return m;
}

}  // namespace

void EncoderConfig::validate() const {
  if (vocab_size <= 0 || hidden <= 0 || layers < 0 || heads <= 0 || max_length <= 0 || ffn_width() <= 0) {
    throw ConfigError("encoder sizes must be positive");
  }
  if (hidden % heads != 0) {
    throw ConfigError("hidden size " + std::to_string(hidden) + " is not divisible by " + std::to_string(heads) +
                      " heads");
  }
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("encoder dropout outside [0,1)");
  if (freeze_depth < 0) throw ConfigError("freeze depth must be >= 0");
}

nlohmann::json EncoderConfig::to_json() const {
  return {{"vocab_size", vocab_size}, {"hidden", hidden},         {"layers", layers},
          {"heads", heads},           {"max_length", max_length}, {"ffn_hidden", ffn_hidden},
          {"dropout", dropout},       {"layer_norm", layer_norm}, {"freeze_depth", freeze_depth}};
}

EncoderConfig EncoderConfig::from_json(const nlohmann::json& j) {
  EncoderConfig c;
  c.vocab_size = j.value("vocab_size", c.vocab_size);
  c.hidden = j.value("hidden", c.hidden);
  c.layers = j.value("layers", c.layers);
  c.heads = j.value("heads", c.heads);
  c.max_length = j.value("max_length", c.max_length);
  c.ffn_hidden = j.value("ffn_hidden", c.ffn_hidden);
  c.dropout = j.value("dropout", c.dropout);
  c.layer_norm = j.value("layer_norm", c.layer_norm);
  c.freeze_depth = j.value("freeze_depth", c.freeze_depth);
  c.validate();
  return c;
}

Matrix sinusoidal_positions(Index rows, Index hidden) {
  Matrix m(rows, hidden);
  for (Index pos = 0; pos < rows; ++pos) {
    for (Index i = 0; i < hidden; ++i) {
      const double rate = std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / static_cast<double>(hidden));
      m(pos, i) = i % 2 == 0 ? std::sin(pos * rate) : std::cos(pos * rate);
    }
  }
  return m;
}

EncoderParams EncoderParams::init(const EncoderConfig& config, Rng& rng) {
  config.validate();
  const Index h = config.hidden;
  const Index f = config.ffn_width();
  EncoderParams p;
  p.token_embedding = Tensor::parameter(normal_matrix(config.vocab_size, h, 0.5, rng), "token_embedding");
  p.position_embedding =
      Tensor::parameter(0.5 * sinusoidal_positions(config.max_length, h), "position_embedding");
  p.embedding_norm_gain = Tensor::parameter(Matrix::Ones(1, h), "embedding_norm_gain");
  p.embedding_norm_bias = Tensor::parameter(Matrix::Zero(1, h), "embedding_norm_bias");
  for (int l = 0; l < config.layers; ++l) {
    EncoderBlock b;
    b.attention = AttentionParams::init(h, config.heads, rng);
    b.attention_norm_gain = Tensor::parameter(Matrix::Ones(1, h), "attention_norm_gain");
    b.attention_norm_bias = Tensor::parameter(Matrix::Zero(1, h), "attention_norm_bias");
    b.ffn_in_weight = Tensor::parameter(xavier_uniform(h, f, rng), "ffn_in_weight");
    b.ffn_in_bias = Tensor::parameter(Matrix::Zero(1, f), "ffn_in_bias");
    b.ffn_out_weight = Tensor::parameter(xavier_uniform(f, h, rng), "ffn_out_weight");
    b.ffn_out_bias = Tensor::parameter(Matrix::Zero(1, h), "ffn_out_bias");
    b.ffn_norm_gain = Tensor::parameter(Matrix::Ones(1, h), "ffn_norm_gain");
    b.ffn_norm_bias = Tensor::parameter(Matrix::Zero(1, h), "ffn_norm_bias");
    p.blocks.push_back(std::move(b));
  }
  return p;
}

void EncoderParams::collect(const std::string& prefix, const EncoderConfig& config, ParamSet& out) const {
  const bool freeze_embeddings = config.freeze_depth > 0;
  auto add = [&](const std::string& name, const Tensor& t, bool frozen) {
    Tensor copy = t;
    copy.set_requires_grad(!frozen);
    out.add(prefix + name, copy);
  };
  add("token_embedding", token_embedding, freeze_embeddings);
  add("position_embedding", position_embedding, freeze_embeddings);
  add("embedding_norm_gain", embedding_norm_gain, freeze_embeddings);
  add("embedding_norm_bias", embedding_norm_bias, freeze_embeddings);
  for (std::size_t l = 0; l < blocks.size(); ++l) {
    const EncoderBlock& b = blocks[l];
    const bool frozen = static_cast<int>(l) < config.freeze_depth;
    ParamSet attn;
    b.attention.collect("", attn);
    for (const auto& [n, t] : attn.entries()) add("block" + std::to_string(l) + ".attention." + n, t, frozen);
    add("block" + std::to_string(l) + ".attention_norm_gain", b.attention_norm_gain, frozen);
    add("block" + std::to_string(l) + ".attention_norm_bias", b.attention_norm_bias, frozen);
    add("block" + std::to_string(l) + ".ffn_in_weight", b.ffn_in_weight, frozen);
    add("block" + std::to_string(l) + ".ffn_in_bias", b.ffn_in_bias, frozen);
    add("block" + std::to_string(l) + ".ffn_out_weight", b.ffn_out_weight, frozen);
    add("block" + std::to_string(l) + ".ffn_out_bias", b.ffn_out_bias, frozen);
    add("block" + std::to_string(l) + ".ffn_norm_gain", b.ffn_norm_gain, frozen);
    add("block" + std::to_string(l) + ".ffn_norm_bias", b.ffn_norm_bias, frozen);
  }
}

Tensor encode(const std::vector<int>& ids, const EncoderParams& params, const EncoderConfig& config,
              const EncodeOptions& options) {
  const auto t = static_cast<Index>(ids.size());
  if (t == 0) throw DimensionError("encode: empty token sequence");
  if (t > config.max_length) {
    throw DimensionError("encode: " + std::to_string(t) + " tokens exceed the maximum length " +
                         std::to_string(config.max_length));
  }
  for (int id : ids) {
    if (id < 0 || id >= config.vocab_size) {
      throw DimensionError("encode: token id " + std::to_string(id) + " outside vocabulary of " +
                           std::to_string(config.vocab_size));
    }
  }
  if (options.training && config.dropout > 0.0 && options.rng == nullptr) {
    throw ConfigError("encoder dropout in training mode needs an rng");
  }
  const bool drop = options.training && config.dropout > 0.0;
  auto maybe_dropout = [&](const Tensor& x) { return drop ? dropout(x, config.dropout, true, *options.rng) : x; };

  Tensor x = add(gather_rows(params.token_embedding, ids), slice_rows(params.position_embedding, 0, t));
  x = maybe_dropout(maybe_norm(x, params.embedding_norm_gain, params.embedding_norm_bias, config.layer_norm));

  AttentionOptions attn;
  attn.dropout = config.dropout;
  attn.training = options.training;
  attn.rng = options.rng;
  for (const EncoderBlock& b : params.blocks) {
    const Tensor a = multi_head_attention(x, x, x, b.attention, attn).output;
    x = maybe_norm(add(x, maybe_dropout(a)), b.attention_norm_gain, b.attention_norm_bias, config.layer_norm);
    const Tensor f = affine(gelu(affine(x, b.ffn_in_weight, b.ffn_in_bias)), b.ffn_out_weight, b.ffn_out_bias);
    x = maybe_norm(add(x, maybe_dropout(f)), b.ffn_norm_gain, b.ffn_norm_bias, config.layer_norm);
  }
  return x;
}

}  // namespace gpr
