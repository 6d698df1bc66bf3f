#include "dualspeech/pipeline.hpp"

#include <spdlog/spdlog.h>

#include "dualspeech/common/error.hpp"
#include "dualspeech/common/io.hpp"

namespace dualspeech {

vocab::UnifiedVocab build_vocab(const std::vector<corpus::ManifestRecord>& records, const VocabSettings& settings,
                                std::size_t audio_size) {
  vocab::UnifiedVocab v;
  v.audio_size = audio_size;
  if (settings.mode == vocab::TokenizerMode::kSubword && settings.merges > 0) {
    const auto texts = corpus::collect_texts(records, true);
    v.text = vocab::TextVocab::train_subword(texts, settings.merges);
  } else {
    v.text = vocab::TextVocab::byte_level();
  }
  return v;
}

Assets fit_assets(const std::vector<corpus::ManifestRecord>& train_records, const corpus::FrameLoader& frames,
                  const AppConfig& cfg) {
  std::size_t dim = 0;
  const std::vector<float> all = corpus::collect_frames(train_records, frames, dim);
  if (dim == 0) fail(ErrorKind::kData, "no speech frames in the training records");
  auto fit = audio::fit_codebook(all, dim, cfg.codebook);
  spdlog::info("codebook: k={} dim={} iterations={} distortion={:.6g}", fit.codebook.k, dim, fit.iterations,
               fit.distortion_history.back());
  Assets assets;
  assets.codebook = std::move(fit.codebook);
  assets.vocab = build_vocab(train_records, cfg.vocab, assets.codebook.k);
  spdlog::info("vocabulary: t={} a={}", assets.vocab.t(), assets.vocab.a());
  return assets;
}

encoder::EncoderConfig sized_encoder(encoder::EncoderConfig cfg, const vocab::UnifiedVocab& vocab) {
  cfg.t = vocab.t();
  cfg.a = vocab.a();
  cfg.validate();
  return cfg;
}

train::Checkpoint start_checkpoint(const AppConfig& cfg, const Assets& assets) {
  return train::initial_checkpoint(sized_encoder(cfg.encoder, assets.vocab), cfg.train, assets.vocab,
                                   assets.codebook);
}

namespace {

corpus::InputContext context_for(const train::Checkpoint& ckpt, std::size_t max_length) {
  if (!ckpt.vocab || !ckpt.codebook) fail(ErrorKind::kData, "checkpoint carries no vocabulary or codebook");
  if (ckpt.vocab->t() != ckpt.encoder.t || ckpt.vocab->a() != ckpt.encoder.a) {
    fail(ErrorKind::kConfig, "checkpoint vocabulary does not match its encoder config");
  }
  return corpus::InputContext{*ckpt.vocab, *ckpt.codebook, std::min(max_length, ckpt.encoder.max_len)};
}

}  // namespace

train::TrainData build_train_data(const train::Checkpoint& ckpt, const std::vector<corpus::ManifestRecord>& records,
                                  const corpus::FrameLoader& frames, std::size_t max_length) {
  const auto ctx = context_for(ckpt, max_length);
  return {corpus::s2t_pairs(records, frames, ctx), corpus::mt_pairs(records, ctx)};
}

eval::EvalReport evaluate_checkpoint(const train::Checkpoint& ckpt, const std::vector<corpus::ManifestRecord>& records,
                                     const corpus::FrameLoader& frames, corpus::RecordTask task,
                                     std::size_t max_length) {
  const auto ctx = context_for(ckpt, max_length);
  eval::EvalOptions opts;
  opts.chunks = ckpt.train.encode_chunks;
  opts.threads = ckpt.train.threads;
  eval::EvalReport report;
  if (task == corpus::RecordTask::kS2T) {
    report = eval::evaluate_s2t(ckpt.params, ckpt.encoder, corpus::s2t_examples(records, frames, ctx), opts);
  } else if (task == corpus::RecordTask::kS2TT) {
    report = eval::evaluate_s2tt(ckpt.params, ckpt.encoder, corpus::s2tt_examples(records, frames, ctx), opts);
  } else {
    fail(ErrorKind::kContract, "evaluate_checkpoint: task must be s2t or s2tt");
  }
  report.provenance = {{"step", ckpt.step},
                       {"seed", ckpt.train.seed},
                       {"config_hash", io::hex64(encoder::config_hash(ckpt.encoder))}};
  return report;
}

}  // namespace dualspeech
