#include <benchmark/benchmark.h>

#include "dualspeech/common/rng.hpp"
#include "dualspeech/numerics/tape.hpp"
#include "dualspeech/objectives/objectives.hpp"

using namespace dualspeech;

namespace {

num::Tensor<float> random_tensor(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<float> v(rows * cols);
  for (auto& x : v) x = static_cast<float>(rng.normal());
  return num::Tensor<float>({rows, cols}, std::move(v));
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_tensor(n, n, 1), b = random_tensor(n, n, 2);
  for (auto _ : state) {
    num::Tape<float> tape(num::GradMode::kDisabled);
    const auto c = tape.matmul(tape.constant(a), tape.constant(b));
    benchmark::DoNotOptimize(tape.value(c).data.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(32)->Arg(128)->Arg(512);

void BM_MatmulBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_tensor(n, n, 1), b = random_tensor(n, n, 2);
  for (auto _ : state) {
    num::Tape<float> tape;
    const auto x = tape.leaf(a), y = tape.leaf(b);
    tape.backward(tape.sum(tape.matmul(x, y)));
    benchmark::DoNotOptimize(tape.grad(x).data.data());
  }
}
BENCHMARK(BM_MatmulBackward)->Arg(128);

void BM_JointLoss(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = random_tensor(n, 128, 3), y = random_tensor(n, 128, 4);
  for (auto _ : state) {
    num::Tape<float> tape;
    const auto vx = tape.leaf(x), vy = tape.leaf(y);
    const auto loss = objectives::total_loss(tape, vx, vy, 1.0f);
    tape.backward(loss.total);
    benchmark::DoNotOptimize(tape.grad(vx).data.data());
  }
}
BENCHMARK(BM_JointLoss)->Arg(64)->Arg(1024);

}  // namespace
