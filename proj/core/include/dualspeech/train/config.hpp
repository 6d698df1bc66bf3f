#pragma once

#include <cstdint>
#include <nlohmann/json_fwd.hpp>

namespace dualspeech::train {

/// Optimization settings. Defaults are desk scale; full_scale() returns the
/// full-size schedule (batch 1024, 2.5k warmup, 100k steps, 25% MT mix).
struct TrainConfig {
  double peak_lr = 1e-3;
  std::size_t warmup_steps = 100;
  std::size_t total_steps = 2000;
  std::size_t batch_size = 64;
  double lambda_spreadout = 1.0;
  double mt_fraction = 0.0;
  std::uint64_t seed = 0;
  std::size_t eval_every = 0;        ///< 0 disables periodic evaluation
  std::size_t checkpoint_every = 0;  ///< 0 writes only initial and final checkpoints
  /// Sequences of a batch are split into this many fixed chunks for
  /// encoding; gradients are reduced chunk by chunk in index order.
  std::size_t encode_chunks = 8;
  std::size_t threads = 0;  ///< 0 = hardware concurrency

  static TrainConfig full_scale();
  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

nlohmann::json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j);

}  // namespace dualspeech::train
