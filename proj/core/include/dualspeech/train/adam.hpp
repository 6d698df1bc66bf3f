#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dualspeech/encoder/encoder.hpp"

namespace dualspeech::train {

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First and second moments for every parameter array, in visit order.
struct OptimizerState {
  AdamHyper hyper;
  std::uint64_t step = 0;
  std::vector<std::vector<float>> m;
  std::vector<std::vector<float>> v;

  static OptimizerState for_params(const encoder::EncoderParams<float>& params);
};

/// One bias-corrected Adam update over flat arrays, using the already
/// incremented step count t >= 1.
void adam_update(std::span<float> w, std::span<const float> g, std::span<float> m, std::span<float> v,
                 const AdamHyper& hyper, std::uint64_t t, double lr);

/// Updates every array in place. Every gradient is checked before any
/// parameter changes; a non-finite entry raises a numeric error naming the
/// array and leaves params and state untouched.
void adam_step(encoder::EncoderParams<float>& params, const encoder::EncoderParams<float>& grads,
               OptimizerState& state, double lr);

}  // namespace dualspeech::train
