#pragma once

#include <string_view>
#include <vector>

#include "dualspeech/train/config.hpp"
#include "dualspeech/vocab/inputs.hpp"

namespace dualspeech::train {

enum class Task { kS2T, kMT };

std::string_view task_name(Task task);

/// Side a is speech (S2T) or source-language text (MT); side b is the
/// transcript or target-language text.
struct TrainingPair {
  vocab::TokenSequence a;
  vocab::TokenSequence b;
  Task task = Task::kS2T;
};

/// Row i of `a` pairs with row i of `b`.
struct PairBatch {
  std::vector<vocab::TokenSequence> a;
  std::vector<vocab::TokenSequence> b;
  std::vector<Task> tasks;

  std::size_t size() const { return a.size(); }
  std::size_t count(Task task) const;
};

/// Round-half-up of fraction * batch_size.
std::size_t mt_count_for(double mt_fraction, std::size_t batch_size);

struct PlannedItem {
  Task task;
  std::size_t index;  ///< into the task's pool
};

/// Pool indices for one step. Each task's pool is walked through a fresh
/// permutation every epoch (seeded by seed, task and epoch index); an epoch
/// yields pool_size / per_step batches and the remainder is dropped, so no
/// item repeats within an epoch. The mixed order is then shuffled with a
/// per-step seed. A pure function of its arguments, which makes resumed runs
/// see the same batches.
std::vector<PlannedItem> plan_batch(std::size_t s2t_pool, std::size_t mt_pool, const TrainConfig& cfg,
                                    std::size_t step);

PairBatch compose_batch(const std::vector<TrainingPair>& s2t_pool, const std::vector<TrainingPair>& mt_pool,
                        const TrainConfig& cfg, std::size_t step);

}  // namespace dualspeech::train
