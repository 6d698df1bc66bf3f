#include "dualspeech/train/step.hpp"

#include <optional>

#include "dualspeech/common/error.hpp"
#include "dualspeech/common/parallel.hpp"
#include "dualspeech/common/rng.hpp"
#include "dualspeech/objectives/objectives.hpp"

namespace dualspeech::train {

using encoder::EncoderConfig;
using encoder::EncoderParams;
using num::Tape;
using num::Tensor;
using num::Var;

namespace {

template <typename T>
void copy_row(Tensor<T>& dst, std::size_t row, const Tensor<T>& src) {
  if (src.size() != dst.cols()) fail(ErrorKind::kDimension, "encode_batch: embedding width mismatch");
  std::copy(src.data.begin(), src.data.end(), dst.row(row).begin());
}

template <typename T>
void add_into(EncoderParams<T>& dst, const EncoderParams<T>& src) {
  std::vector<const Tensor<T>*> from;
  src.for_each([&](const std::string&, const Tensor<T>& t) { from.push_back(&t); });
  std::size_t i = 0;
  dst.for_each([&](const std::string&, Tensor<T>& t) {
    const auto& s = from[i++]->data;
    for (std::size_t k = 0; k < t.data.size(); ++k) t.data[k] += s[k];
  });
}

std::uint64_t row_seed(const EncodeOptions& opts, std::uint64_t side, std::size_t row) {
  return derive_seed(opts.step_seed, side, row);
}

template <typename T>
LossValue joint_loss(const Tensor<T>& x, const Tensor<T>& y, double lambda, Tensor<T>* dx, Tensor<T>* dy) {
  Tape<T> tape(dx ? num::GradMode::kEnabled : num::GradMode::kDisabled);
  const Var xv = tape.leaf(x);
  const Var yv = tape.leaf(y);
  const auto loss = objectives::total_loss(tape, xv, yv, static_cast<T>(lambda));
  LossValue out{static_cast<double>(tape.value(loss.total).item()),
                static_cast<double>(tape.value(loss.contrastive).item()),
                static_cast<double>(tape.value(loss.spreadout).item())};
  if (dx) {
    tape.backward(loss.total);
    *dx = tape.grad(xv);
    *dy = tape.grad(yv);
  }
  return out;
}

}  // namespace

template <typename T>
Tensor<T> encode_batch(const EncoderParams<T>& params, const EncoderConfig& cfg,
                       std::span<const vocab::TokenSequence> seqs, const EncodeOptions& opts, std::uint64_t side) {
  Tensor<T> out = Tensor<T>::zeros({seqs.size(), cfg.p});
  parallel_chunks(opts.chunks, opts.threads, [&](std::size_t c) {
    const auto range = chunk_range(seqs.size(), opts.chunks, c);
    for (std::size_t i = range.begin; i < range.end; ++i) {
      Tape<T> tape(num::GradMode::kDisabled);
      const auto bound = encoder::bind_params(tape, params);
      const Var e = encoder::encode_on_tape(tape, bound, cfg, seqs[i].ids, opts.train, row_seed(opts, side, i));
      copy_row(out, i, tape.value(e));
    }
  });
  return out;
}

template <typename T>
LossValue batch_loss(const EncoderParams<T>& params, const EncoderConfig& cfg, const PairBatch& batch,
                     double lambda, const EncodeOptions& opts) {
  if (batch.a.size() != batch.b.size()) fail(ErrorKind::kBatch, "batch sides differ in size");
  const Tensor<T> x = encode_batch(params, cfg, std::span(batch.a), opts, 0);
  const Tensor<T> y = encode_batch(params, cfg, std::span(batch.b), opts, 1);
  return joint_loss<T>(x, y, lambda, nullptr, nullptr);
}

template <typename T>
LossValue batch_loss_and_grad(const EncoderParams<T>& params, const EncoderConfig& cfg, const PairBatch& batch,
                              double lambda, const EncodeOptions& opts, EncoderParams<T>& grads) {
  const std::size_t n = batch.a.size();
  if (batch.b.size() != n) fail(ErrorKind::kBatch, "batch sides differ in size");
  if (n == 0) fail(ErrorKind::kBatch, "empty batch");
  const std::size_t total = 2 * n;  // rows [0, n) are side a, [n, 2n) side b
  auto seq_at = [&](std::size_t i) -> const vocab::TokenSequence& { return i < n ? batch.a[i] : batch.b[i - n]; };

  std::vector<EncoderParams<T>> chunk_grads(opts.chunks);
  std::vector<std::optional<Tape<T>>> tapes(total);
  std::vector<Var> outputs(total);
  Tensor<T> x = Tensor<T>::zeros({n, cfg.p});
  Tensor<T> y = Tensor<T>::zeros({n, cfg.p});

  parallel_chunks(opts.chunks, opts.threads, [&](std::size_t c) {
    const auto range = chunk_range(total, opts.chunks, c);
    if (range.begin == range.end) return;
    chunk_grads[c] = encoder::zeros_like(params);
    for (std::size_t i = range.begin; i < range.end; ++i) {
      auto& tape = tapes[i].emplace();
      const auto bound = encoder::bind_params(tape, params, &chunk_grads[c]);
      const std::uint64_t side = i < n ? 0 : 1;
      const std::size_t row = i < n ? i : i - n;
      outputs[i] = encoder::encode_on_tape(tape, bound, cfg, seq_at(i).ids, opts.train, row_seed(opts, side, row));
      copy_row(i < n ? x : y, row, tape.value(outputs[i]));
    }
  });

  Tensor<T> dx, dy;
  const LossValue loss = joint_loss<T>(x, y, lambda, &dx, &dy);

  parallel_chunks(opts.chunks, opts.threads, [&](std::size_t c) {
    const auto range = chunk_range(total, opts.chunks, c);
    for (std::size_t i = range.begin; i < range.end; ++i) {
      auto& tape = *tapes[i];
      const Tensor<T>& upstream_src = i < n ? dx : dy;
      const std::size_t row = i < n ? i : i - n;
      const auto r = upstream_src.row(row);
      const Tensor<T> upstream(tape.value(outputs[i]).shape, std::vector<T>(r.begin(), r.end()));
      tape.backward(outputs[i], upstream);
      tapes[i].reset();
    }
  });

  grads = encoder::zeros_like(params);
  for (std::size_t c = 0; c < opts.chunks; ++c) {
    if (chunk_grads[c].token_embedding.size() != 0) add_into(grads, chunk_grads[c]);
  }
  return loss;
}

#define DUALSPEECH_INSTANTIATE(T)                                                                               \
  template Tensor<T> encode_batch<T>(const EncoderParams<T>&, const EncoderConfig&,                             \
                                     std::span<const vocab::TokenSequence>, const EncodeOptions&, std::uint64_t); \
  template LossValue batch_loss<T>(const EncoderParams<T>&, const EncoderConfig&, const PairBatch&, double,     \
                                   const EncodeOptions&);                                                       \
  template LossValue batch_loss_and_grad<T>(const EncoderParams<T>&, const EncoderConfig&, const PairBatch&,    \
                                            double, const EncodeOptions&, EncoderParams<T>&);

DUALSPEECH_INSTANTIATE(float)
DUALSPEECH_INSTANTIATE(double)
#undef DUALSPEECH_INSTANTIATE

}  // namespace dualspeech::train
