#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dualspeech/encoder/encoder.hpp"
#include "dualspeech/train/batching.hpp"

namespace dualspeech::train {

struct EncodeOptions {
  bool train = false;            ///< enables dropout
  std::uint64_t step_seed = 0;   ///< dropout masks derive from (step_seed, side, row)
  std::size_t chunks = 8;        ///< fixed work split; results do not depend on threads
  std::size_t threads = 0;
};

struct LossValue {
  double total = 0.0;
  double contrastive = 0.0;
  double spreadout = 0.0;
};

/// Encodes each sequence independently; row i of the result is the
/// embedding of seqs[i]. `side` only selects the dropout stream.
template <typename T>
num::Tensor<T> encode_batch(const encoder::EncoderParams<T>& params, const encoder::EncoderConfig& cfg,
                            std::span<const vocab::TokenSequence> seqs, const EncodeOptions& opts,
                            std::uint64_t side = 0);

/// Joint loss over the whole batch without gradients.
template <typename T>
LossValue batch_loss(const encoder::EncoderParams<T>& params, const encoder::EncoderConfig& cfg,
                     const PairBatch& batch, double lambda, const EncodeOptions& opts);

/// Loss and full parameter gradient. Every sequence is run forward on its own
/// tape (in parallel chunks), the joint loss is formed over the stacked
/// embeddings on a small tape, and its row gradients are pulled back through
/// each sequence tape. `grads` is overwritten.
template <typename T>
LossValue batch_loss_and_grad(const encoder::EncoderParams<T>& params, const encoder::EncoderConfig& cfg,
                              const PairBatch& batch, double lambda, const EncodeOptions& opts,
                              encoder::EncoderParams<T>& grads);

}  // namespace dualspeech::train
