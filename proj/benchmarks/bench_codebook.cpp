#include <benchmark/benchmark.h>

#include "dualspeech/audio/codebook.hpp"
#include "dualspeech/common/rng.hpp"

using namespace dualspeech;

namespace {

std::vector<float> random_frames(std::size_t n, std::size_t dim) {
  Rng rng(7);
  std::vector<float> v(n * dim);
  for (auto& x : v) x = static_cast<float>(rng.normal());
  return v;
}

void BM_FitCodebook(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const auto frames = random_frames(20000, 16);
  audio::KMeansOptions opts;
  opts.k = k;
  opts.max_iters = 10;
  for (auto _ : state) {
    const auto r = audio::fit_codebook(frames, 16, opts);
    benchmark::DoNotOptimize(r.codebook.centroids.data());
  }
}
BENCHMARK(BM_FitCodebook)->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_Quantize(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  audio::KMeansOptions opts;
  opts.k = k;
  opts.max_iters = 2;
  const auto cb = audio::fit_codebook(random_frames(4 * k, 16), 16, opts).codebook;
  const auto frames = random_frames(10000, 16);
  for (auto _ : state) {
    const auto tokens = audio::quantize(frames, 16, cb);
    benchmark::DoNotOptimize(tokens.data());
  }
  state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_Quantize)->Arg(128)->Arg(512);

}  // namespace
