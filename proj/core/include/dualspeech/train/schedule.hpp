#pragma once

#include "dualspeech/train/config.hpp"

namespace dualspeech::train {

/// Linear ramp to peak_lr over warmup_steps, then a half cosine down to 0 at
/// total_steps. Throws a contract error for step > total_steps.
double lr_at(std::size_t step, const TrainConfig& cfg);

}  // namespace dualspeech::train
