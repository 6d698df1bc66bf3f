#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <numbers>
#include <set>

#include "dualspeech/common/error.hpp"
#include "dualspeech/common/io.hpp"
#include "dualspeech/common/rng.hpp"
#include "dualspeech/train/adam.hpp"
#include "dualspeech/train/batching.hpp"
#include "dualspeech/train/checkpoint.hpp"
#include "dualspeech/train/schedule.hpp"
#include "dualspeech/train/trainer.hpp"

using namespace dualspeech;
using train::TrainConfig;
namespace fs = std::filesystem;

namespace {

encoder::EncoderConfig tiny_encoder() {
  encoder::EncoderConfig c;
  c.t = 16;
  c.a = 8;
  c.m = 8;
  c.layers = 1;
  c.heads = 2;
  c.ffn_width = 16;
  c.p = 4;
  c.max_len = 12;
  return c;
}

TrainConfig tiny_train() {
  TrainConfig t;
  t.batch_size = 4;
  t.warmup_steps = 2;
  t.total_steps = 8;
  t.peak_lr = 5e-3;
  t.seed = 17;
  t.encode_chunks = 2;
  t.threads = 1;
  return t;
}

// Speech ids in [t, t + a), text ids in [0, t); pair i shares a "concept" i.
train::TrainData tiny_data(const encoder::EncoderConfig& c, std::size_t n_s2t, std::size_t n_mt) {
  train::TrainData d;
  Rng rng(3);
  auto seq = [&](bool speech, std::size_t len) {
    vocab::TokenSequence s;
    s.modality = speech ? vocab::Modality::kSpeech : vocab::Modality::kText;
    s.prefix_length = 1;
    s.ids.push_back(speech ? 1 : 2);
    for (std::size_t i = 0; i < len; ++i) {
      s.ids.push_back(speech ? static_cast<int>(c.t + rng.below(c.a)) : static_cast<int>(3 + rng.below(c.t - 3)));
    }
    return s;
  };
  for (std::size_t i = 0; i < n_s2t; ++i) d.s2t.push_back({seq(true, 3 + i % 4), seq(false, 2 + i % 3), train::Task::kS2T});
  for (std::size_t i = 0; i < n_mt; ++i) d.mt.push_back({seq(false, 3), seq(false, 4), train::Task::kMT});
  return d;
}

fs::path temp_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("dualspeech_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<float> flat(const encoder::EncoderParams<float>& p) {
  std::vector<float> v;
  p.for_each([&](const std::string&, const num::Tensor<float>& t) { v.insert(v.end(), t.data.begin(), t.data.end()); });
  return v;
}

}  // namespace

TEST(Schedule, WarmupThenHalfCosine) {
  TrainConfig c;
  c.peak_lr = 1e-3;
  c.warmup_steps = 100;
  c.total_steps = 1100;
  EXPECT_EQ(train::lr_at(0, c), 0.0);
  EXPECT_NEAR(train::lr_at(50, c), 5e-4, 1e-15);
  EXPECT_NEAR(train::lr_at(100, c), 1e-3, 1e-15);
  EXPECT_NEAR(train::lr_at(600, c), 5e-4, 1e-15);
  EXPECT_NEAR(train::lr_at(350, c), 1e-3 * 0.5 * (1 + std::cos(std::numbers::pi * 0.25)), 1e-15);
  EXPECT_NEAR(train::lr_at(1100, c), 0.0, 1e-18);
  for (std::size_t s = 101; s <= 1100; ++s) EXPECT_LE(train::lr_at(s, c), train::lr_at(s - 1, c));
  EXPECT_THROW(train::lr_at(1101, c), Error);
  c.warmup_steps = c.total_steps;
  EXPECT_EQ(train::lr_at(c.total_steps, c), 0.0);
}

TEST(TrainConfig, ValidationAndJson) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  const auto full = TrainConfig::full_scale();
  EXPECT_EQ(full.batch_size, 1024u);
  EXPECT_EQ(full.total_steps, 100000u);
  EXPECT_EQ(full.warmup_steps, 2500u);
  EXPECT_DOUBLE_EQ(full.mt_fraction, 0.25);
  EXPECT_EQ(train::train_config_from_json(train::to_json(full)), full);
  c.batch_size = 1;
  EXPECT_THROW(c.validate(), Error);
  c = TrainConfig{};
  c.mt_fraction = 1.5;
  EXPECT_THROW(c.validate(), Error);
  c = TrainConfig{};
  c.warmup_steps = c.total_steps + 1;
  EXPECT_THROW(c.validate(), Error);
}

TEST(Adam, MatchesReferenceUpdate) {
  train::AdamHyper h;
  std::vector<float> w{0.5f, -1.0f, 2.0f}, m(3, 0.0f), v(3, 0.0f);
  std::vector<double> rw{0.5, -1.0, 2.0}, rm(3, 0.0), rv(3, 0.0);
  Rng rng(1);
  for (std::uint64_t t = 1; t <= 20; ++t) {
    std::vector<float> g(3);
    for (auto& x : g) x = static_cast<float>(rng.normal());
    const double lr = 1e-2 * static_cast<double>(t);
    train::adam_update(w, g, m, v, h, t, lr);
    for (std::size_t i = 0; i < 3; ++i) {
      rm[i] = 0.9 * rm[i] + 0.1 * g[i];
      rv[i] = 0.999 * rv[i] + 0.001 * static_cast<double>(g[i]) * g[i];
      const double mh = rm[i] / (1 - std::pow(0.9, static_cast<double>(t)));
      const double vh = rv[i] / (1 - std::pow(0.999, static_cast<double>(t)));
      rw[i] -= lr * mh / (std::sqrt(vh) + 1e-8);
      EXPECT_NEAR(w[i], rw[i], 1e-5);
    }
  }
}

TEST(Adam, FirstStepMovesByLearningRate) {
  const auto c = tiny_encoder();
  auto p = encoder::init_params<float>(c, 1);
  const auto before = flat(p);
  auto g = encoder::zeros_like(p);
  g.proj_bias.data[0] = 3.0f;
  g.proj_bias.data[1] = -0.01f;
  auto state = train::OptimizerState::for_params(p);
  train::adam_step(p, g, state, 0.1);
  EXPECT_EQ(state.step, 1u);
  EXPECT_NEAR(p.proj_bias.data[0], -0.1, 1e-6);
  EXPECT_NEAR(p.proj_bias.data[1], 0.1, 1e-4);
  EXPECT_EQ(p.proj_bias.data[2], 0.0f);
}

TEST(Adam, NonFiniteGradientLeavesEverythingUntouched) {
  const auto c = tiny_encoder();
  auto p = encoder::init_params<float>(c, 1);
  const auto before = flat(p);
  auto g = encoder::zeros_like(p);
  g.token_embedding.data[0] = 1.0f;
  g.proj_weight.data[3] = NAN;
  auto state = train::OptimizerState::for_params(p);
  try {
    train::adam_step(p, g, state, 0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNumeric);
    EXPECT_NE(std::string(e.what()).find("proj.weight"), std::string::npos);
  }
  EXPECT_EQ(flat(p), before);
  EXPECT_EQ(state.step, 0u);
}

TEST(Batching, MtCountRoundsHalfUp) {
  EXPECT_EQ(train::mt_count_for(0.25, 64), 16u);
  EXPECT_EQ(train::mt_count_for(0.25, 1024), 256u);
  EXPECT_EQ(train::mt_count_for(0.25, 2), 1u);
  EXPECT_EQ(train::mt_count_for(0.25, 6), 2u);
  EXPECT_EQ(train::mt_count_for(0.0, 64), 0u);
  EXPECT_EQ(train::mt_count_for(1.0, 64), 64u);
}

TEST(Batching, PlansAreDeterministicMixedAndEpochWise) {
  TrainConfig c;
  c.batch_size = 8;
  c.mt_fraction = 0.25;
  c.seed = 4;
  const std::size_t s2t_pool = 20, mt_pool = 9;
  // 20 / 6 = 3 s2t batches per epoch; 9 / 2 = 4 mt batches per epoch.
  std::set<std::size_t> epoch_s2t;
  for (std::size_t step = 0; step < 12; ++step) {
    const auto plan = train::plan_batch(s2t_pool, mt_pool, c, step);
    const auto again = train::plan_batch(s2t_pool, mt_pool, c, step);
    ASSERT_EQ(plan.size(), 8u);
    std::size_t mt = 0;
    for (std::size_t i = 0; i < plan.size(); ++i) {
      EXPECT_EQ(plan[i].task, again[i].task);
      EXPECT_EQ(plan[i].index, again[i].index);
      if (plan[i].task == train::Task::kMT) {
        ++mt;
        EXPECT_LT(plan[i].index, mt_pool);
      } else {
        EXPECT_LT(plan[i].index, s2t_pool);
        EXPECT_TRUE(epoch_s2t.insert(plan[i].index).second) << "repeat within epoch at step " << step;
      }
    }
    EXPECT_EQ(mt, 2u);
    if (step % 3 == 2) {
      EXPECT_EQ(epoch_s2t.size(), 18u);
      epoch_s2t.clear();
    }
  }
  c.mt_fraction = 0.0;
  for (const auto& item : train::plan_batch(s2t_pool, 0, c, 3)) EXPECT_EQ(item.task, train::Task::kS2T);
}

TEST(Batching, SmallPoolsRaiseDataError) {
  TrainConfig c;
  c.batch_size = 8;
  c.mt_fraction = 0.5;
  try {
    train::plan_batch(100, 3, c, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kData);
  }
  EXPECT_THROW(train::plan_batch(3, 100, c, 0), Error);
}

TEST(Batching, ComposedBatchCarriesTasks) {
  const auto enc = tiny_encoder();
  const auto data = tiny_data(enc, 12, 12);
  auto c = tiny_train();
  c.mt_fraction = 0.5;
  const auto b = train::compose_batch(data.s2t, data.mt, c, 0);
  EXPECT_EQ(b.size(), 4u);
  EXPECT_EQ(b.count(train::Task::kMT), 2u);
  for (std::size_t i = 0; i < b.size(); ++i) {
    EXPECT_EQ(b.a[i].modality == vocab::Modality::kSpeech, b.tasks[i] == train::Task::kS2T);
  }
}

TEST(Checkpoint, RoundTripPreservesEverything) {
  const auto enc = tiny_encoder();
  auto ckpt = train::initial_checkpoint(enc, tiny_train(), vocab::UnifiedVocab{vocab::TextVocab::byte_level(), 8});
  ckpt.step = 5;
  ckpt.optimizer.step = 5;
  ckpt.optimizer.m[2][1] = 0.25f;
  ckpt.optimizer.v[3][0] = 0.5f;
  audio::Codebook cb;
  cb.k = 2;
  cb.dim = 3;
  cb.centroids = {1, 2, 3, 4, 5, 6};
  ckpt.codebook = cb;
  const auto bytes = train::encode_checkpoint(ckpt);
  EXPECT_EQ(bytes.substr(0, 8), "DSCKPT01");
  const auto back = train::decode_checkpoint(bytes);
  EXPECT_EQ(back.encoder, ckpt.encoder);
  EXPECT_EQ(back.train, ckpt.train);
  EXPECT_EQ(back.step, 5u);
  EXPECT_EQ(flat(back.params), flat(ckpt.params));
  EXPECT_EQ(back.optimizer.step, 5u);
  EXPECT_EQ(back.optimizer.m, ckpt.optimizer.m);
  EXPECT_EQ(back.optimizer.v, ckpt.optimizer.v);
  ASSERT_TRUE(back.vocab && back.codebook);
  EXPECT_EQ(back.vocab->a(), 8u);
  EXPECT_EQ(back.codebook->centroids, cb.centroids);
  EXPECT_EQ(train::encode_checkpoint(back), bytes);
}

TEST(Checkpoint, CorruptionAndMismatchAreDetected) {
  const auto enc = tiny_encoder();
  const auto ckpt = train::initial_checkpoint(enc, tiny_train());
  const auto bytes = train::encode_checkpoint(ckpt);
  auto expect_integrity = [](const std::string& b) {
    try {
      train::decode_checkpoint(b);
      ADD_FAILURE() << "corruption not detected";
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kIntegrity) << e.what();
    }
  };
  auto flipped = bytes;
  flipped[flipped.size() - 3] ^= 0x40;
  expect_integrity(flipped);
  expect_integrity(bytes.substr(0, bytes.size() - 4));
  expect_integrity(bytes + "x");
  auto magic = bytes;
  magic[3] = 'Z';
  expect_integrity(magic);

  const auto dir = temp_dir("ckpt_mismatch");
  train::save_checkpoint(ckpt, dir / "a.bin");
  EXPECT_NO_THROW(train::load_checkpoint(dir / "a.bin", enc));
  auto other = enc;
  other.layers = 2;
  try {
    train::load_checkpoint(dir / "a.bin", other);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig);
  }
  fs::remove_all(dir);
}

TEST(Trainer, IdenticalRunsWriteIdenticalMetrics) {
  const auto enc = tiny_encoder();
  const auto data = tiny_data(enc, 12, 0);
  const auto dir = temp_dir("determinism");
  for (const char* name : {"a", "b"}) {
    train::TrainOptions opts;
    opts.checkpoint_dir = dir / name;
    opts.metrics_path = dir / name / "metrics.jsonl";
    opts.log_every = 0;
    train::train(train::initial_checkpoint(enc, tiny_train()), data, opts);
  }
  const auto a = io::read_file(dir / "a" / "metrics.jsonl");
  EXPECT_EQ(a, io::read_file(dir / "b" / "metrics.jsonl"));
  EXPECT_EQ(io::read_file(dir / "a" / "last.bin"), io::read_file(dir / "b" / "last.bin"));
  std::size_t lines = 0;
  for (char ch : a) lines += ch == '\n';
  EXPECT_EQ(lines, 8u);
  const auto first = nlohmann::json::parse(a.substr(0, a.find('\n')));
  EXPECT_EQ(first["step"], 0);
  EXPECT_EQ(first["lr"], 0.0);
  EXPECT_EQ(first["task_mix"]["s2t"], 4);
  fs::remove_all(dir);
}

TEST(Trainer, ResumeReproducesUninterruptedRun) {
  const auto enc = tiny_encoder();
  const auto data = tiny_data(enc, 12, 12);
  auto cfg = tiny_train();
  cfg.mt_fraction = 0.25;
  cfg.checkpoint_every = 3;
  const auto dir = temp_dir("resume");

  train::TrainOptions full;
  full.checkpoint_dir = dir / "full";
  full.log_every = 0;
  const auto straight = train::train(train::initial_checkpoint(enc, cfg), data, full);
  EXPECT_TRUE(fs::exists(dir / "full" / "ckpt_000003.bin"));
  EXPECT_TRUE(fs::exists(dir / "full" / "ckpt_000006.bin"));

  train::TrainOptions first;
  first.checkpoint_dir = dir / "split";
  first.stop_at = 5;
  first.log_every = 0;
  train::train(train::initial_checkpoint(enc, cfg), data, first);
  auto mid = train::load_checkpoint(dir / "split" / "last.bin", enc);
  EXPECT_EQ(mid.step, 5u);
  train::TrainOptions second;
  second.checkpoint_dir = dir / "split";
  second.log_every = 0;
  const auto resumed = train::train(std::move(mid), data, second);

  ASSERT_EQ(resumed.records.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& a = straight.records[5 + i];
    const auto& b = resumed.records[i];
    EXPECT_EQ(a.step, b.step);
    EXPECT_EQ(a.lr, b.lr);
    EXPECT_EQ(a.loss, b.loss);
    EXPECT_EQ(a.mt_pairs, b.mt_pairs);
  }
  EXPECT_EQ(flat(resumed.last.params), flat(straight.last.params));
  EXPECT_EQ(resumed.last.optimizer.m, straight.last.optimizer.m);
  EXPECT_EQ(io::read_file(dir / "full" / "last.bin"), io::read_file(dir / "split" / "last.bin"));
  fs::remove_all(dir);
}

TEST(Trainer, LossDecreasesOnLearnablePairs) {
  const auto enc = tiny_encoder();
  const auto data = tiny_data(enc, 8, 0);
  auto cfg = tiny_train();
  cfg.total_steps = 300;
  cfg.warmup_steps = 5;
  cfg.peak_lr = 1e-2;
  // At p = 4 a unit-weight spreadout term outweighs the contrastive signal.
  cfg.lambda_spreadout = 0.1;
  train::TrainOptions opts;
  opts.log_every = 0;
  const auto r = train::train(train::initial_checkpoint(enc, cfg), data, opts);
  double early = 0, late = 0;
  for (std::size_t i = 0; i < 20; ++i) {
    early += r.records[i].contrastive;
    late += r.records[280 + i].contrastive;
  }
  EXPECT_LT(late, 0.5 * early);
}

TEST(Trainer, NonFiniteLossStopsWithNumericError) {
  const auto enc = tiny_encoder();
  const auto data = tiny_data(enc, 12, 0);
  auto ckpt = train::initial_checkpoint(enc, tiny_train());
  ckpt.params.proj_weight.data[0] = NAN;
  train::TrainOptions opts;
  opts.log_every = 0;
  try {
    train::train(std::move(ckpt), data, opts);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNumeric);
  }
}

TEST(Trainer, EvalHookRunsOnSchedule) {
  const auto enc = tiny_encoder();
  const auto data = tiny_data(enc, 12, 0);
  auto cfg = tiny_train();
  cfg.eval_every = 4;
  train::TrainOptions opts;
  opts.log_every = 0;
  std::vector<std::size_t> seen;
  opts.eval = [&](const encoder::EncoderParams<float>&, std::size_t step) {
    seen.push_back(step);
    return nlohmann::json{{"probe", static_cast<int>(step)}};
  };
  const auto r = train::train(train::initial_checkpoint(enc, cfg), data, opts);
  EXPECT_EQ(seen, (std::vector<std::size_t>{4, 8}));
  EXPECT_EQ(r.records[3].to_json()["eval"]["probe"], 4);
  EXPECT_FALSE(r.records[0].to_json().contains("eval"));
}
