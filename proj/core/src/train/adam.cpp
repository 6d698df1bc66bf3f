#include "dualspeech/train/adam.hpp"

#include <cmath>

#include "dualspeech/common/error.hpp"

namespace dualspeech::train {

using encoder::EncoderParams;
using num::Tensor;

OptimizerState OptimizerState::for_params(const EncoderParams<float>& params) {
  OptimizerState s;
  params.for_each([&](const std::string&, const Tensor<float>& t) {
    s.m.emplace_back(t.size(), 0.0f);
    s.v.emplace_back(t.size(), 0.0f);
  });
  return s;
}

void adam_update(std::span<float> w, std::span<const float> g, std::span<float> m, std::span<float> v,
                 const AdamHyper& h, std::uint64_t t, double lr) {
  if (g.size() != w.size() || m.size() != w.size() || v.size() != w.size()) {
    fail(ErrorKind::kDimension, "adam_update: size mismatch");
  }
  const double c1 = 1.0 - std::pow(h.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(h.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double gi = g[i];
    const double mi = h.beta1 * m[i] + (1.0 - h.beta1) * gi;
    const double vi = h.beta2 * v[i] + (1.0 - h.beta2) * gi * gi;
    m[i] = static_cast<float>(mi);
    v[i] = static_cast<float>(vi);
    w[i] = static_cast<float>(w[i] - lr * (mi / c1) / (std::sqrt(vi / c2) + h.eps));
  }
}

void adam_step(EncoderParams<float>& params, const EncoderParams<float>& grads, OptimizerState& state, double lr) {
  std::vector<const Tensor<float>*> gs;
  grads.for_each([&](const std::string& name, const Tensor<float>& g) {
    for (float x : g.data) {
      if (!std::isfinite(x)) fail(ErrorKind::kNumeric, "adam_step: non-finite gradient in " + name);
    }
    gs.push_back(&g);
  });
  std::size_t i = 0;
  params.for_each([&](const std::string& name, Tensor<float>& w) {
    if (i >= gs.size() || gs[i]->shape != w.shape || state.m.at(i).size() != w.size()) {
      fail(ErrorKind::kDimension, "adam_step: shape mismatch at " + name);
    }
    ++i;
  });
  if (i != gs.size() || i != state.m.size()) fail(ErrorKind::kDimension, "adam_step: array count mismatch");
  ++state.step;
  i = 0;
  params.for_each([&](const std::string&, Tensor<float>& w) {
    adam_update(w.data, gs[i]->data, state.m[i], state.v[i], state.hyper, state.step, lr);
    ++i;
  });
}

}  // namespace dualspeech::train
