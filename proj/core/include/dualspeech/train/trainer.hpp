#pragma once

#include <filesystem>
#include <functional>
#include <nlohmann/json.hpp>
#include <optional>
#include <vector>

#include "dualspeech/train/batching.hpp"
#include "dualspeech/train/checkpoint.hpp"

namespace dualspeech::train {

struct TrainData {
  std::vector<TrainingPair> s2t;
  std::vector<TrainingPair> mt;
};

struct StepRecord {
  std::size_t step = 0;  ///< index of the iteration (0-based)
  double lr = 0.0;
  double loss = 0.0;
  double contrastive = 0.0;
  double spreadout = 0.0;
  std::size_t s2t_pairs = 0;
  std::size_t mt_pairs = 0;
  nlohmann::json eval;  ///< null unless an evaluation ran after this step

  nlohmann::json to_json() const;
};

/// Called with a snapshot of the parameters after the update of `step`;
/// the returned object is merged into that step's metrics line.
using EvalHook = std::function<nlohmann::json(const encoder::EncoderParams<float>&, std::size_t step)>;

struct TrainOptions {
  /// Receives ckpt_<step>.bin for periodic checkpoints and last.bin after
  /// every checkpoint write. Empty disables checkpoint files.
  std::filesystem::path checkpoint_dir;
  /// Append-only JSON lines, one per step. Empty disables the file.
  std::filesystem::path metrics_path;
  /// Stop once this many steps are complete (default: total_steps).
  std::optional<std::size_t> stop_at;
  EvalHook eval;
  std::size_t log_every = 50;
};

struct TrainResult {
  Checkpoint last;
  std::vector<StepRecord> records;
};

/// Fresh parameters and optimizer state at step 0. Parameters are drawn from
/// a stream derived from train.seed.
Checkpoint initial_checkpoint(const encoder::EncoderConfig& enc, const TrainConfig& train,
                              std::optional<vocab::UnifiedVocab> vocab = std::nullopt,
                              std::optional<audio::Codebook> codebook = std::nullopt);

/// Runs steps start.step .. stop_at - 1. Step s composes batch s, computes
/// the joint loss and gradient, and applies Adam at lr_at(s). Every input to
/// a step is a function of (config, data, s), so resuming from a checkpoint
/// reproduces an uninterrupted run exactly. A non-finite loss raises a
/// numeric error before the update; checkpoints already written are kept.
TrainResult train(Checkpoint start, const TrainData& data, const TrainOptions& options = {});

}  // namespace dualspeech::train
