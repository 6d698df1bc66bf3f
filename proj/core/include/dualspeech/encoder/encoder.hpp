#pragma once

#include <cstdint>
#include <nlohmann/json_fwd.hpp>
#include <span>
#include <string>
#include <vector>

#include "dualspeech/numerics/tape.hpp"
#include "dualspeech/vocab/inputs.hpp"

namespace dualspeech::encoder {

enum class AttentionMode { kCausal, kBidirectional };
enum class Pooling { kMean, kLastToken };
enum class Activation { kGelu, kRelu };

struct EncoderConfig {
  std::size_t t = 260;  ///< text vocabulary size
  std::size_t a = 512;  ///< audio vocabulary size
  std::size_t m = 128;  ///< embedding width
  std::size_t layers = 4;
  std::size_t heads = 4;
  std::size_t ffn_width = 512;
  std::size_t p = 128;  ///< output embedding dimension
  double dropout = 0.1;
  AttentionMode attention = AttentionMode::kCausal;
  Pooling pooling = Pooling::kMean;
  Activation activation = Activation::kGelu;
  std::size_t max_len = 256;
  double layer_norm_eps = 1e-5;

  std::size_t vocab_size() const { return t + a; }
  void validate() const;
  bool operator==(const EncoderConfig&) const = default;
};

nlohmann::json to_json(const EncoderConfig& cfg);
EncoderConfig encoder_config_from_json(const nlohmann::json& j);
/// Stable hash of the architecture fields, used to match checkpoints.
std::uint64_t config_hash(const EncoderConfig& cfg);

template <typename T>
struct BlockParams {
  num::Tensor<T> ln1_gain, ln1_bias;
  num::Tensor<T> qkv_weight, qkv_bias;  // m x 3m, 3m
  num::Tensor<T> out_weight, out_bias;  // m x m, m
  num::Tensor<T> ln2_gain, ln2_bias;
  num::Tensor<T> ffn_in_weight, ffn_in_bias;    // m x ffn, ffn
  num::Tensor<T> ffn_out_weight, ffn_out_bias;  // ffn x m, m
};

/// Every trainable array of the shared encoder. Speech and text inputs use
/// the same arrays; there are no modality-specific weights.
template <typename T>
struct EncoderParams {
  num::Tensor<T> token_embedding;     // (t + a) x m
  num::Tensor<T> position_embedding;  // max_len x m
  std::vector<BlockParams<T>> blocks;
  num::Tensor<T> final_gain, final_bias;
  num::Tensor<T> proj_weight;  // p x m
  num::Tensor<T> proj_bias;    // p

  /// Visits (name, tensor) in a fixed order shared by optimizer state,
  /// gradient buffers and checkpoints.
  template <typename Self, typename F>
  static void visit(Self& self, F&& f) {
    f(std::string("embed.token"), self.token_embedding);
    f(std::string("embed.position"), self.position_embedding);
    for (std::size_t l = 0; l < self.blocks.size(); ++l) {
      auto& b = self.blocks[l];
      const std::string p = "block" + std::to_string(l) + ".";
      f(p + "ln1.gain", b.ln1_gain);
      f(p + "ln1.bias", b.ln1_bias);
      f(p + "attn.qkv.weight", b.qkv_weight);
      f(p + "attn.qkv.bias", b.qkv_bias);
      f(p + "attn.out.weight", b.out_weight);
      f(p + "attn.out.bias", b.out_bias);
      f(p + "ln2.gain", b.ln2_gain);
      f(p + "ln2.bias", b.ln2_bias);
      f(p + "ffn.in.weight", b.ffn_in_weight);
      f(p + "ffn.in.bias", b.ffn_in_bias);
      f(p + "ffn.out.weight", b.ffn_out_weight);
      f(p + "ffn.out.bias", b.ffn_out_bias);
    }
    f(std::string("final_ln.gain"), self.final_gain);
    f(std::string("final_ln.bias"), self.final_bias);
    f(std::string("proj.weight"), self.proj_weight);
    f(std::string("proj.bias"), self.proj_bias);
  }

  template <typename F>
  void for_each(F&& f) { visit(*this, f); }
  template <typename F>
  void for_each(F&& f) const { visit(*this, f); }

  std::size_t total_size() const {
    std::size_t n = 0;
    for_each([&](const std::string&, const num::Tensor<T>& t) { n += t.size(); });
    return n;
  }
};

/// Correctly shaped arrays: zero weights and biases, unit layer-norm gains.
template <typename T>
EncoderParams<T> allocate_params(const EncoderConfig& cfg);

/// Scaled normal initialization: std 0.02 for embedding tables,
/// 1/sqrt(fan_in) for linear maps, zero biases, unit layer-norm gains.
template <typename T>
EncoderParams<T> init_params(const EncoderConfig& cfg, std::uint64_t seed);

template <typename T>
EncoderParams<T> zeros_like(const EncoderParams<T>& params);

template <typename To, typename From>
EncoderParams<To> cast_params(const EncoderParams<From>& from) {
  EncoderParams<To> out;
  out.blocks.resize(from.blocks.size());
  std::vector<const num::Tensor<From>*> src;
  from.for_each([&](const std::string&, const num::Tensor<From>& t) { src.push_back(&t); });
  std::size_t i = 0;
  out.for_each([&](const std::string&, num::Tensor<To>& t) { t = num::cast<To>(*src[i++]); });
  return out;
}

/// Closed-form parameter count for a configuration.
std::size_t param_count(const EncoderConfig& cfg);

/// Tape handles for one binding of the parameters.
struct BoundEncoder {
  struct Block {
    num::Var ln1_gain, ln1_bias, qkv_weight, qkv_bias, out_weight, out_bias;
    num::Var ln2_gain, ln2_bias, ffn_in_weight, ffn_in_bias, ffn_out_weight, ffn_out_bias;
  };
  num::Var token_embedding, position_embedding;
  std::vector<Block> blocks;
  num::Var final_gain, final_bias, proj_weight, proj_bias;
};

/// Binds parameters as borrowed leaves. With `grads` set, backward adds
/// into the matching arrays of `grads`.
template <typename T>
BoundEncoder bind_params(num::Tape<T>& tape, const EncoderParams<T>& params, EncoderParams<T>* grads = nullptr);

/// Embed -> pre-norm transformer blocks -> final norm -> pool -> project.
/// Returns a rank-1 tensor of length p. Dropout is applied only when
/// `train` is set, with masks drawn from `dropout_seed`.
template <typename T>
num::Var encode_on_tape(num::Tape<T>& tape, const BoundEncoder& bound, const EncoderConfig& cfg,
                        std::span<const int> ids, bool train, std::uint64_t dropout_seed);

struct EmbeddingVec {
  std::vector<float> values;
  vocab::Modality modality = vocab::Modality::kText;
  std::string language;
};

template <typename T>
EmbeddingVec encode(const EncoderParams<T>& params, const EncoderConfig& cfg, const vocab::TokenSequence& seq,
                    bool train = false, std::uint64_t step_seed = 0);

extern template EncoderParams<float> init_params<float>(const EncoderConfig&, std::uint64_t);
extern template EncoderParams<double> init_params<double>(const EncoderConfig&, std::uint64_t);

}  // namespace dualspeech::encoder
