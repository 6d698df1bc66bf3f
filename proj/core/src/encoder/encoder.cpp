#include "dualspeech/encoder/encoder.hpp"

#include <cmath>
#include <nlohmann/json.hpp>
#include <numeric>

#include "dualspeech/common/error.hpp"
#include "dualspeech/common/io.hpp"
#include "dualspeech/common/rng.hpp"

namespace dualspeech::encoder {

void EncoderConfig::validate() const {
  auto bad = [](const std::string& msg) { fail(ErrorKind::kConfig, "encoder config: " + msg); };
  if (t == 0) bad("t must be positive");
  if (m == 0 || heads == 0) bad("m and heads must be positive");
  if (m % heads != 0) bad("m=" + std::to_string(m) + " is not divisible by heads=" + std::to_string(heads));
  if (p < 2) bad("p must be >= 2");
  if (!(dropout >= 0.0 && dropout < 1.0)) bad("dropout must be in [0,1)");
  if (max_len == 0) bad("max_len must be positive");
  if (ffn_width == 0) bad("ffn_width must be positive");
  if (!(layer_norm_eps > 0.0)) bad("layer_norm_eps must be positive");
}

nlohmann::json to_json(const EncoderConfig& c) {
  return {{"t", c.t},
          {"a", c.a},
          {"m", c.m},
          {"layers", c.layers},
          {"heads", c.heads},
          {"ffn_width", c.ffn_width},
          {"p", c.p},
          {"dropout", c.dropout},
          {"attention", c.attention == AttentionMode::kCausal ? "causal" : "bidirectional"},
          {"pooling", c.pooling == Pooling::kMean ? "mean" : "last"},
          {"activation", c.activation == Activation::kGelu ? "gelu" : "relu"},
          {"max_len", c.max_len},
          {"layer_norm_eps", c.layer_norm_eps}};
}

EncoderConfig encoder_config_from_json(const nlohmann::json& j) {
  EncoderConfig c;
  try {
    c.t = j.value("t", c.t);
    c.a = j.value("a", c.a);
    c.m = j.value("m", c.m);
    c.layers = j.value("layers", c.layers);
    c.heads = j.value("heads", c.heads);
    c.ffn_width = j.value("ffn_width", c.ffn_width);
    c.p = j.value("p", c.p);
    c.dropout = j.value("dropout", c.dropout);
    c.max_len = j.value("max_len", c.max_len);
    c.layer_norm_eps = j.value("layer_norm_eps", c.layer_norm_eps);
    const std::string attention = j.value("attention", std::string("causal"));
    if (attention == "causal") c.attention = AttentionMode::kCausal;
    else if (attention == "bidirectional") c.attention = AttentionMode::kBidirectional;
    else fail(ErrorKind::kConfig, "encoder config: unknown attention mode '" + attention + "'");
    const std::string pooling = j.value("pooling", std::string("mean"));
    if (pooling == "mean") c.pooling = Pooling::kMean;
    else if (pooling == "last") c.pooling = Pooling::kLastToken;
    else fail(ErrorKind::kConfig, "encoder config: unknown pooling '" + pooling + "'");
    const std::string act = j.value("activation", std::string("gelu"));
    if (act == "gelu") c.activation = Activation::kGelu;
    else if (act == "relu") c.activation = Activation::kRelu;
    else fail(ErrorKind::kConfig, "encoder config: unknown activation '" + act + "'");
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kConfig, std::string("encoder config: ") + e.what());
  }
  c.validate();
  return c;
}

std::uint64_t config_hash(const EncoderConfig& cfg) {
  auto j = to_json(cfg);
  // Dropout only changes training behaviour, not the parameter layout.
  j.erase("dropout");
  return io::fnv1a64(j.dump());
}

std::size_t param_count(const EncoderConfig& c) {
  const std::size_t m = c.m;
  const std::size_t f = c.ffn_width;
  const std::size_t per_block = 2 * m                 // ln1
                                + m * 3 * m + 3 * m   // qkv
                                + m * m + m           // out
                                + 2 * m               // ln2
                                + m * f + f           // ffn in
                                + f * m + m;          // ffn out
  return c.vocab_size() * m + c.max_len * m + c.layers * per_block + 2 * m + c.p * m + c.p;
}

template <typename T>
EncoderParams<T> allocate_params(const EncoderConfig& cfg) {
  cfg.validate();
  using num::Tensor;
  const std::size_t m = cfg.m;
  const std::size_t f = cfg.ffn_width;
  EncoderParams<T> p;
  p.token_embedding = Tensor<T>::zeros({cfg.vocab_size(), m});
  p.position_embedding = Tensor<T>::zeros({cfg.max_len, m});
  p.blocks.resize(cfg.layers);
  for (auto& b : p.blocks) {
    b.ln1_gain = Tensor<T>::filled({m}, T{1});
    b.ln1_bias = Tensor<T>::zeros({m});
    b.qkv_weight = Tensor<T>::zeros({m, 3 * m});
    b.qkv_bias = Tensor<T>::zeros({3 * m});
    b.out_weight = Tensor<T>::zeros({m, m});
    b.out_bias = Tensor<T>::zeros({m});
    b.ln2_gain = Tensor<T>::filled({m}, T{1});
    b.ln2_bias = Tensor<T>::zeros({m});
    b.ffn_in_weight = Tensor<T>::zeros({m, f});
    b.ffn_in_bias = Tensor<T>::zeros({f});
    b.ffn_out_weight = Tensor<T>::zeros({f, m});
    b.ffn_out_bias = Tensor<T>::zeros({m});
  }
  p.final_gain = Tensor<T>::filled({m}, T{1});
  p.final_bias = Tensor<T>::zeros({m});
  p.proj_weight = Tensor<T>::zeros({cfg.p, m});
  p.proj_bias = Tensor<T>::zeros({cfg.p});
  return p;
}

template <typename T>
EncoderParams<T> init_params(const EncoderConfig& cfg, std::uint64_t seed) {
  const std::size_t m = cfg.m;
  const std::size_t f = cfg.ffn_width;
  EncoderParams<T> p = allocate_params<T>(cfg);
  using num::Tensor;
  Rng rng(seed);
  auto fill_normal = [&](Tensor<T>& t, double stddev) {
    for (auto& v : t.data) v = static_cast<T>(rng.normal() * stddev);
  };
  fill_normal(p.token_embedding, 0.02);
  fill_normal(p.position_embedding, 0.02);
  for (auto& b : p.blocks) {
    fill_normal(b.qkv_weight, 1.0 / std::sqrt(static_cast<double>(m)));
    fill_normal(b.out_weight, 1.0 / std::sqrt(static_cast<double>(m)));
    fill_normal(b.ffn_in_weight, 1.0 / std::sqrt(static_cast<double>(m)));
    fill_normal(b.ffn_out_weight, 1.0 / std::sqrt(static_cast<double>(f)));
  }
  fill_normal(p.proj_weight, 0.02);
  return p;
}

template <typename T>
EncoderParams<T> zeros_like(const EncoderParams<T>& params) {
  EncoderParams<T> out;
  out.blocks.resize(params.blocks.size());
  std::vector<const num::Tensor<T>*> src;
  params.for_each([&](const std::string&, const num::Tensor<T>& t) { src.push_back(&t); });
  std::size_t i = 0;
  out.for_each([&](const std::string&, num::Tensor<T>& t) { t = num::Tensor<T>::zeros(src[i++]->shape); });
  return out;
}

template <typename T>
BoundEncoder bind_params(num::Tape<T>& tape, const EncoderParams<T>& params, EncoderParams<T>* grads) {
  auto bind = [&](const num::Tensor<T>& value, num::Tensor<T>* sink) { return tape.param(value, sink); };
  auto sink = [&](auto member) { return grads ? &member(*grads) : nullptr; };
  BoundEncoder b;
  b.token_embedding = bind(params.token_embedding, sink([](auto& g) -> auto& { return g.token_embedding; }));
  b.position_embedding =
      bind(params.position_embedding, sink([](auto& g) -> auto& { return g.position_embedding; }));
  b.blocks.resize(params.blocks.size());
  for (std::size_t l = 0; l < params.blocks.size(); ++l) {
    const auto& src = params.blocks[l];
    BlockParams<T>* g = grads ? &grads->blocks[l] : nullptr;
    auto& dst = b.blocks[l];
    dst.ln1_gain = bind(src.ln1_gain, g ? &g->ln1_gain : nullptr);
    dst.ln1_bias = bind(src.ln1_bias, g ? &g->ln1_bias : nullptr);
    dst.qkv_weight = bind(src.qkv_weight, g ? &g->qkv_weight : nullptr);
    dst.qkv_bias = bind(src.qkv_bias, g ? &g->qkv_bias : nullptr);
    dst.out_weight = bind(src.out_weight, g ? &g->out_weight : nullptr);
    dst.out_bias = bind(src.out_bias, g ? &g->out_bias : nullptr);
    dst.ln2_gain = bind(src.ln2_gain, g ? &g->ln2_gain : nullptr);
    dst.ln2_bias = bind(src.ln2_bias, g ? &g->ln2_bias : nullptr);
    dst.ffn_in_weight = bind(src.ffn_in_weight, g ? &g->ffn_in_weight : nullptr);
    dst.ffn_in_bias = bind(src.ffn_in_bias, g ? &g->ffn_in_bias : nullptr);
    dst.ffn_out_weight = bind(src.ffn_out_weight, g ? &g->ffn_out_weight : nullptr);
    dst.ffn_out_bias = bind(src.ffn_out_bias, g ? &g->ffn_out_bias : nullptr);
  }
  b.final_gain = bind(params.final_gain, sink([](auto& g) -> auto& { return g.final_gain; }));
  b.final_bias = bind(params.final_bias, sink([](auto& g) -> auto& { return g.final_bias; }));
  b.proj_weight = bind(params.proj_weight, sink([](auto& g) -> auto& { return g.proj_weight; }));
  b.proj_bias = bind(params.proj_bias, sink([](auto& g) -> auto& { return g.proj_bias; }));
  return b;
}

template <typename T>
num::Var encode_on_tape(num::Tape<T>& tape, const BoundEncoder& bound, const EncoderConfig& cfg,
                        std::span<const int> ids, bool train, std::uint64_t dropout_seed) {
  using num::Var;
  const std::size_t len = ids.size();
  if (len == 0) fail(ErrorKind::kEmptySequence, "encode: empty token sequence");
  if (len > cfg.max_len) {
    fail(ErrorKind::kDimension,
         "encode: sequence length " + std::to_string(len) + " exceeds max_len " + std::to_string(cfg.max_len));
  }
  const T rate = train ? static_cast<T>(cfg.dropout) : T{0};
  const T eps = static_cast<T>(cfg.layer_norm_eps);
  Rng rng(dropout_seed);

  std::vector<int> positions(len);
  std::iota(positions.begin(), positions.end(), 0);
  Var x = tape.add(tape.embedding_gather(bound.token_embedding, ids),
                   tape.embedding_gather(bound.position_embedding, positions));
  x = tape.dropout(x, rate, rng);

  const std::size_t m = cfg.m;
  const std::size_t head_width = m / cfg.heads;
  const T score_scale = T{1} / std::sqrt(static_cast<T>(head_width));
  const bool causal = cfg.attention == AttentionMode::kCausal;
  std::vector<Var> head_out(cfg.heads);

  for (const auto& blk : bound.blocks) {
    Var h = tape.layer_norm(x, blk.ln1_gain, blk.ln1_bias, eps);
    Var qkv = tape.add_row(tape.matmul(h, blk.qkv_weight), blk.qkv_bias);
    for (std::size_t hd = 0; hd < cfg.heads; ++hd) {
      Var q = tape.slice_cols(qkv, hd * head_width, head_width);
      Var k = tape.slice_cols(qkv, m + hd * head_width, head_width);
      Var v = tape.slice_cols(qkv, 2 * m + hd * head_width, head_width);
      Var scores = tape.scale(tape.matmul_nt(q, k), score_scale);
      head_out[hd] = tape.matmul(tape.softmax_rows(scores, causal), v);
    }
    Var attn = tape.add_row(tape.matmul(tape.concat_cols(head_out), blk.out_weight), blk.out_bias);
    x = tape.add(x, tape.dropout(attn, rate, rng));

    Var h2 = tape.layer_norm(x, blk.ln2_gain, blk.ln2_bias, eps);
    Var ff = tape.add_row(tape.matmul(h2, blk.ffn_in_weight), blk.ffn_in_bias);
    ff = cfg.activation == Activation::kGelu ? tape.gelu(ff) : tape.relu(ff);
    ff = tape.add_row(tape.matmul(ff, blk.ffn_out_weight), blk.ffn_out_bias);
    x = tape.add(x, tape.dropout(ff, rate, rng));
  }
  x = tape.layer_norm(x, bound.final_gain, bound.final_bias, eps);
  Var pooled = cfg.pooling == Pooling::kMean ? tape.mean_pool(x) : tape.select_row(x, len - 1);
  return tape.add_row(tape.matmul_nt(pooled, bound.proj_weight), bound.proj_bias);
}

template <typename T>
EmbeddingVec encode(const EncoderParams<T>& params, const EncoderConfig& cfg, const vocab::TokenSequence& seq,
                    bool train, std::uint64_t step_seed) {
  num::Tape<T> tape(num::GradMode::kDisabled);
  const auto bound = bind_params(tape, params);
  const num::Var out = encode_on_tape(tape, bound, cfg, seq.ids, train, step_seed);
  EmbeddingVec vec;
  const auto& v = tape.value(out);
  vec.values.assign(v.data.begin(), v.data.end());
  vec.modality = seq.modality;
  vec.language = seq.language;
  return vec;
}

#define DUALSPEECH_INSTANTIATE(T)                                                                              \
  template EncoderParams<T> allocate_params<T>(const EncoderConfig&);                                         \
  template EncoderParams<T> init_params<T>(const EncoderConfig&, std::uint64_t);                              \
  template EncoderParams<T> zeros_like<T>(const EncoderParams<T>&);                                           \
  template BoundEncoder bind_params<T>(num::Tape<T>&, const EncoderParams<T>&, EncoderParams<T>*);            \
  template num::Var encode_on_tape<T>(num::Tape<T>&, const BoundEncoder&, const EncoderConfig&,               \
                                      std::span<const int>, bool, std::uint64_t);                             \
  template EmbeddingVec encode<T>(const EncoderParams<T>&, const EncoderConfig&, const vocab::TokenSequence&, \
                                  bool, std::uint64_t);

DUALSPEECH_INSTANTIATE(float)
DUALSPEECH_INSTANTIATE(double)
#undef DUALSPEECH_INSTANTIATE

}  // namespace dualspeech::encoder
