#include "dualspeech/train/batching.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "dualspeech/common/error.hpp"
#include "dualspeech/common/rng.hpp"

namespace dualspeech::train {

namespace {

constexpr std::uint64_t kOrderStream = 0x6f72646572ULL;

void take_from_pool(std::vector<PlannedItem>& out, Task task, std::size_t pool, std::size_t per_step,
                    std::uint64_t seed, std::size_t step) {
  if (per_step == 0) return;
  if (pool < per_step) {
    fail(ErrorKind::kData, std::string(task_name(task)) + " pool has " + std::to_string(pool) +
                               " pairs but a batch needs " + std::to_string(per_step));
  }
  const std::size_t per_epoch = pool / per_step;
  const std::size_t epoch = step / per_epoch;
  const std::size_t pos = step % per_epoch;
  std::vector<std::size_t> perm(pool);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(task) + 1, epoch));
  rng.shuffle(perm);
  for (std::size_t i = 0; i < per_step; ++i) out.push_back({task, perm[pos * per_step + i]});
}

}  // namespace

std::string_view task_name(Task task) { return task == Task::kS2T ? "s2t" : "mt"; }

std::size_t PairBatch::count(Task task) const {
  std::size_t n = 0;
  for (Task t : tasks) n += t == task;
  return n;
}

std::size_t mt_count_for(double mt_fraction, std::size_t batch_size) {
  return static_cast<std::size_t>(std::floor(mt_fraction * static_cast<double>(batch_size) + 0.5));
}

std::vector<PlannedItem> plan_batch(std::size_t s2t_pool, std::size_t mt_pool, const TrainConfig& cfg,
                                    std::size_t step) {
  const std::size_t n_mt = mt_count_for(cfg.mt_fraction, cfg.batch_size);
  const std::size_t n_s2t = cfg.batch_size - n_mt;
  std::vector<PlannedItem> items;
  items.reserve(cfg.batch_size);
  take_from_pool(items, Task::kS2T, s2t_pool, n_s2t, cfg.seed, step);
  take_from_pool(items, Task::kMT, mt_pool, n_mt, cfg.seed, step);
  Rng rng(derive_seed(cfg.seed, kOrderStream, step));
  rng.shuffle(items);
  return items;
}

PairBatch compose_batch(const std::vector<TrainingPair>& s2t_pool, const std::vector<TrainingPair>& mt_pool,
                        const TrainConfig& cfg, std::size_t step) {
  PairBatch batch;
  for (const PlannedItem& item : plan_batch(s2t_pool.size(), mt_pool.size(), cfg, step)) {
    const TrainingPair& pair = item.task == Task::kS2T ? s2t_pool[item.index] : mt_pool[item.index];
    batch.a.push_back(pair.a);
    batch.b.push_back(pair.b);
    batch.tasks.push_back(item.task);
  }
  return batch;
}

}  // namespace dualspeech::train
