#include <benchmark/benchmark.h>

#include "dualspeech/common/rng.hpp"
#include "dualspeech/train/step.hpp"

using namespace dualspeech;

namespace {

encoder::EncoderConfig desk_config() {
  encoder::EncoderConfig c;
  c.t = 516;
  c.a = 128;
  c.m = 128;
  c.layers = 4;
  c.heads = 4;
  c.ffn_width = 512;
  c.p = 128;
  c.max_len = 64;
  return c;
}

std::vector<vocab::TokenSequence> random_batch(const encoder::EncoderConfig& c, std::size_t n, std::size_t len,
                                               std::uint64_t seed) {
  Rng rng(seed);
  std::vector<vocab::TokenSequence> out(n);
  for (auto& s : out) {
    s.ids.resize(len);
    for (auto& id : s.ids) id = static_cast<int>(rng.below(c.vocab_size()));
  }
  return out;
}

void BM_EncodeBatch(benchmark::State& state) {
  const auto c = desk_config();
  const auto params = encoder::init_params<float>(c, 1);
  const auto seqs = random_batch(c, 64, static_cast<std::size_t>(state.range(0)), 2);
  train::EncodeOptions opts;
  for (auto _ : state) {
    const auto e = train::encode_batch(params, c, std::span<const vocab::TokenSequence>(seqs), opts);
    benchmark::DoNotOptimize(e.data.data());
  }
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_EncodeBatch)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_TrainStepGradient(benchmark::State& state) {
  const auto c = desk_config();
  const auto params = encoder::init_params<float>(c, 1);
  train::PairBatch batch;
  batch.a = random_batch(c, 64, 18, 3);
  batch.b = random_batch(c, 64, 13, 4);
  batch.tasks.assign(64, train::Task::kS2T);
  train::EncodeOptions opts;
  opts.train = true;
  auto grads = encoder::zeros_like(params);
  for (auto _ : state) {
    const auto loss = train::batch_loss_and_grad(params, c, batch, 1.0, opts, grads);
    benchmark::DoNotOptimize(loss.total);
  }
}
BENCHMARK(BM_TrainStepGradient)->Unit(benchmark::kMillisecond);

}  // namespace
