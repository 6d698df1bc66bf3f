#include "dualspeech/train/schedule.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "dualspeech/common/error.hpp"

namespace dualspeech::train {

double lr_at(std::size_t step, const TrainConfig& cfg) {
  if (step > cfg.total_steps) {
    fail(ErrorKind::kContract, "lr_at: step " + std::to_string(step) + " beyond total_steps " +
                                   std::to_string(cfg.total_steps));
  }
  if (step < cfg.warmup_steps) {
    return cfg.peak_lr * static_cast<double>(step) / static_cast<double>(cfg.warmup_steps);
  }
  const std::size_t decay_steps = cfg.total_steps - cfg.warmup_steps;
  const double progress =
      decay_steps == 0 ? 1.0 : static_cast<double>(step - cfg.warmup_steps) / static_cast<double>(decay_steps);
  return cfg.peak_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

}  // namespace dualspeech::train
