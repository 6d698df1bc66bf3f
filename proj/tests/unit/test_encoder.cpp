#include <gtest/gtest.h>

#include <cmath>
#include <nlohmann/json.hpp>

#include "dualspeech/common/error.hpp"
#include "dualspeech/common/rng.hpp"
#include "dualspeech/encoder/encoder.hpp"
#include "dualspeech/train/step.hpp"

using namespace dualspeech;
using encoder::EncoderConfig;

namespace {

EncoderConfig small_config() {
  EncoderConfig c;
  c.t = 20;
  c.a = 12;
  c.m = 16;
  c.layers = 2;
  c.heads = 4;
  c.ffn_width = 32;
  c.p = 8;
  c.max_len = 16;
  return c;
}

vocab::TokenSequence make_seq(std::vector<int> ids, vocab::Modality m = vocab::Modality::kText) {
  vocab::TokenSequence s;
  s.ids = std::move(ids);
  s.modality = m;
  s.prefix_length = 1;
  return s;
}

std::vector<vocab::TokenSequence> random_batch(Rng& rng, std::size_t n, const EncoderConfig& c) {
  std::vector<vocab::TokenSequence> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<int> ids(1 + rng.below(c.max_len));
    for (auto& id : ids) id = static_cast<int>(rng.below(c.vocab_size()));
    out.push_back(make_seq(ids));
  }
  return out;
}

train::PairBatch random_pairs(Rng& rng, std::size_t n, const EncoderConfig& c) {
  train::PairBatch b;
  b.a = random_batch(rng, n, c);
  b.b = random_batch(rng, n, c);
  b.tasks.assign(n, train::Task::kS2T);
  return b;
}

}  // namespace

TEST(EncoderConfig, ValidationAndJsonRoundTrip) {
  auto c = small_config();
  EXPECT_NO_THROW(c.validate());
  c.heads = 3;
  EXPECT_THROW(c.validate(), Error);
  c = small_config();
  c.attention = encoder::AttentionMode::kBidirectional;
  c.pooling = encoder::Pooling::kLastToken;
  c.activation = encoder::Activation::kRelu;
  const auto back = encoder::encoder_config_from_json(encoder::to_json(c));
  EXPECT_EQ(back, c);
  EXPECT_EQ(encoder::config_hash(back), encoder::config_hash(c));
  auto d = c;
  d.m = 32;
  EXPECT_NE(encoder::config_hash(d), encoder::config_hash(c));
  auto j = encoder::to_json(c);
  j["pooling"] = "max";
  EXPECT_THROW(encoder::encoder_config_from_json(j), Error);
}

TEST(EncoderParams, CountMatchesAllocationAndVisitOrder) {
  for (std::size_t layers : {1u, 2u, 4u}) {
    auto c = small_config();
    c.layers = layers;
    const auto p = encoder::init_params<float>(c, 1);
    EXPECT_EQ(p.total_size(), encoder::param_count(c));
    std::vector<std::string> names;
    p.for_each([&](const std::string& n, const num::Tensor<float>&) { names.push_back(n); });
    EXPECT_EQ(names.front(), "embed.token");
    EXPECT_EQ(names.back(), "proj.bias");
    EXPECT_EQ(names.size(), 2 + 12 * layers + 4);
  }
  const auto c = small_config();
  const auto p = encoder::init_params<float>(c, 1);
  EXPECT_EQ(p.token_embedding.shape, (num::Shape{c.t + c.a, c.m}));
  EXPECT_EQ(p.proj_weight.shape, (num::Shape{c.p, c.m}));
  EXPECT_EQ(p.blocks[0].qkv_weight.shape, (num::Shape{c.m, 3 * c.m}));
}

TEST(EncoderParams, InitIsSeededAndScaled) {
  auto c = small_config();
  c.t = 300;
  c.a = 300;
  const auto a = encoder::init_params<double>(c, 5);
  const auto b = encoder::init_params<double>(c, 5);
  const auto d = encoder::init_params<double>(c, 6);
  EXPECT_EQ(a.token_embedding.data, b.token_embedding.data);
  EXPECT_NE(a.token_embedding.data, d.token_embedding.data);
  double sq = 0;
  for (double v : a.token_embedding.data) sq += v * v;
  EXPECT_NEAR(std::sqrt(sq / static_cast<double>(a.token_embedding.size())), 0.02, 0.002);
  for (double g : a.blocks[0].ln1_gain.data) EXPECT_EQ(g, 1.0);
  for (double v : a.blocks[0].qkv_bias.data) EXPECT_EQ(v, 0.0);
}

TEST(Encoder, OutputShapeAndModalityIndependence) {
  const auto c = small_config();
  const auto p = encoder::init_params<float>(c, 2);
  const auto text = make_seq({1, 2, 3}, vocab::Modality::kText);
  const auto speech = make_seq({1, 2, 3}, vocab::Modality::kSpeech);
  const auto e1 = encoder::encode(p, c, text);
  const auto e2 = encoder::encode(p, c, speech);
  ASSERT_EQ(e1.values.size(), c.p);
  // One shared tower: the same ids embed identically whatever the modality tag.
  EXPECT_EQ(e1.values, e2.values);
  EXPECT_EQ(e2.modality, vocab::Modality::kSpeech);
}

TEST(Encoder, RejectsEmptyAndOverlongInputs) {
  const auto c = small_config();
  const auto p = encoder::init_params<float>(c, 2);
  try {
    encoder::encode(p, c, make_seq({}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kEmptySequence);
  }
  EXPECT_THROW(encoder::encode(p, c, make_seq(std::vector<int>(c.max_len + 1, 1))), Error);
  EXPECT_THROW(encoder::encode(p, c, make_seq({static_cast<int>(c.vocab_size())})), Error);
}

TEST(Encoder, DropoutOnlyInTrainingAndSeeded) {
  const auto c = small_config();
  const auto p = encoder::init_params<float>(c, 3);
  const auto s = make_seq({4, 5, 6, 7});
  EXPECT_EQ(encoder::encode(p, c, s, false, 1).values, encoder::encode(p, c, s, false, 2).values);
  EXPECT_EQ(encoder::encode(p, c, s, true, 1).values, encoder::encode(p, c, s, true, 1).values);
  EXPECT_NE(encoder::encode(p, c, s, true, 1).values, encoder::encode(p, c, s, true, 2).values);
  EXPECT_NE(encoder::encode(p, c, s, true, 1).values, encoder::encode(p, c, s, false, 1).values);
}

TEST(Encoder, PositionsMatterAndPoolingModesDiffer) {
  auto c = small_config();
  const auto p = encoder::init_params<double>(c, 4);
  EXPECT_NE(encoder::encode(p, c, make_seq({1, 2, 3})).values, encoder::encode(p, c, make_seq({3, 2, 1})).values);
  auto last = c;
  last.pooling = encoder::Pooling::kLastToken;
  EXPECT_NE(encoder::encode(p, c, make_seq({1, 2, 3})).values, encoder::encode(p, last, make_seq({1, 2, 3})).values);
  // A single token attends only to itself under either mask.
  auto bi = c;
  bi.attention = encoder::AttentionMode::kBidirectional;
  const auto a1 = encoder::encode(p, c, make_seq({9})).values;
  const auto a2 = encoder::encode(p, bi, make_seq({9})).values;
  for (std::size_t i = 0; i < a1.size(); ++i) EXPECT_NEAR(a1[i], a2[i], 1e-12);
  EXPECT_NE(encoder::encode(p, c, make_seq({9, 1})).values, encoder::encode(p, bi, make_seq({9, 1})).values);
}

TEST(Encoder, FloatMatchesDouble) {
  const auto c = small_config();
  const auto pd = encoder::init_params<double>(c, 8);
  const auto pf = encoder::cast_params<float>(pd);
  const auto s = make_seq({0, 5, 25, 31, 7});
  const auto ed = encoder::encode(pd, c, s).values;
  const auto ef = encoder::encode(pf, c, s).values;
  for (std::size_t i = 0; i < ed.size(); ++i) EXPECT_NEAR(ed[i], ef[i], 1e-5);
}

TEST(EncodeBatch, RowsMatchSingleEncodesForAnyChunking) {
  const auto c = small_config();
  const auto p = encoder::init_params<float>(c, 9);
  Rng rng(10);
  const auto seqs = random_batch(rng, 13, c);
  train::EncodeOptions opts;
  opts.train = true;
  opts.step_seed = 77;
  opts.chunks = 1;
  opts.threads = 1;
  const auto base = train::encode_batch(p, c, std::span<const vocab::TokenSequence>(seqs), opts, 1);
  for (std::size_t chunks : {3u, 8u, 13u}) {
    for (std::size_t threads : {1u, 4u}) {
      opts.chunks = chunks;
      opts.threads = threads;
      const auto e = train::encode_batch(p, c, std::span<const vocab::TokenSequence>(seqs), opts, 1);
      EXPECT_EQ(e.data, base.data) << chunks << " chunks, " << threads << " threads";
    }
  }
  opts.train = false;
  const auto eval = train::encode_batch(p, c, std::span<const vocab::TokenSequence>(seqs), opts);
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    const auto single = encoder::encode(p, c, seqs[i]).values;
    for (std::size_t k = 0; k < c.p; ++k) EXPECT_FLOAT_EQ(eval.at(i, k), single[k]);
  }
}

TEST(BatchGradient, ThreadCountIsBitwiseIrrelevantAndChunkCountWithinTolerance) {
  const auto c = small_config();
  const auto p = encoder::init_params<float>(c, 11);
  Rng rng(12);
  const auto batch = random_pairs(rng, 16, c);
  train::EncodeOptions opts;
  opts.train = true;
  opts.step_seed = 5;
  opts.chunks = 4;
  auto flat = [](const encoder::EncoderParams<float>& g) {
    std::vector<float> v;
    g.for_each([&](const std::string&, const num::Tensor<float>& t) { v.insert(v.end(), t.data.begin(), t.data.end()); });
    return v;
  };
  auto run = [&](std::size_t chunks, std::size_t threads) {
    opts.chunks = chunks;
    opts.threads = threads;
    auto g = encoder::zeros_like(p);
    const auto loss = train::batch_loss_and_grad(p, c, batch, 1.0, opts, g);
    return std::make_pair(loss.total, flat(g));
  };
  const auto [l1, g1] = run(4, 1);
  const auto [l2, g2] = run(4, 3);
  EXPECT_EQ(l1, l2);
  EXPECT_EQ(g1, g2);
  const auto [l3, g3] = run(1, 1);
  const auto [l4, g4] = run(16, 2);
  EXPECT_NEAR(l1, l3, 1e-5);
  double max_abs = 0;
  for (float v : g1) max_abs = std::max(max_abs, std::abs(static_cast<double>(v)));
  for (std::size_t i = 0; i < g1.size(); ++i) {
    EXPECT_NEAR(g1[i], g3[i], 1e-5 * max_abs);
    EXPECT_NEAR(g1[i], g4[i], 1e-5 * max_abs);
  }
  // A second call overwrites rather than accumulates.
  const auto [l5, g5] = run(4, 1);
  EXPECT_EQ(g5, g1);
}

TEST(BatchGradient, LossAgreesWithForwardOnlyPath) {
  const auto c = small_config();
  const auto p = encoder::init_params<double>(c, 13);
  Rng rng(14);
  const auto batch = random_pairs(rng, 6, c);
  train::EncodeOptions opts;
  auto g = encoder::zeros_like(p);
  const auto a = train::batch_loss_and_grad(p, c, batch, 0.5, opts, g);
  const auto b = train::batch_loss(p, c, batch, 0.5, opts);
  EXPECT_NEAR(a.total, b.total, 1e-12);
  EXPECT_NEAR(a.total, a.contrastive + 0.5 * a.spreadout, 1e-12);
  train::PairBatch bad = batch;
  bad.b.pop_back();
  EXPECT_THROW(train::batch_loss(p, c, bad, 0.5, opts), Error);
}
