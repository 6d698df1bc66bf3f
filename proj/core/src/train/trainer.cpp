#include "dualspeech/train/trainer.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <fstream>

#include "dualspeech/common/error.hpp"
#include "dualspeech/common/io.hpp"
#include "dualspeech/common/rng.hpp"
#include "dualspeech/train/schedule.hpp"
#include "dualspeech/train/step.hpp"

namespace dualspeech::train {

namespace {

constexpr std::uint64_t kInitStream = 0x696e6974ULL;
constexpr std::uint64_t kDropoutStream = 0x64726f70ULL;

std::string step_file(std::size_t step) {
  std::string digits = std::to_string(step);
  if (digits.size() < 6) digits.insert(0, 6 - digits.size(), '0');
  return "ckpt_" + digits + ".bin";
}

void write_checkpoint(const Checkpoint& c, const std::filesystem::path& dir) {
  if (dir.empty()) return;
  std::filesystem::create_directories(dir);
  const std::string bytes = encode_checkpoint(c);
  io::write_file_atomic(dir / step_file(c.step), bytes);
  io::write_file_atomic(dir / "last.bin", bytes);
}

}  // namespace

nlohmann::json StepRecord::to_json() const {
  nlohmann::json j = {{"step", step},
                      {"lr", lr},
                      {"loss", loss},
                      {"contrastive", contrastive},
                      {"spreadout", spreadout},
                      {"task_mix", {{"s2t", s2t_pairs}, {"mt", mt_pairs}}}};
  if (!eval.is_null()) j["eval"] = eval;
  return j;
}

Checkpoint initial_checkpoint(const encoder::EncoderConfig& enc, const TrainConfig& train,
                              std::optional<vocab::UnifiedVocab> vocab, std::optional<audio::Codebook> codebook) {
  enc.validate();
  train.validate();
  Checkpoint c;
  c.encoder = enc;
  c.train = train;
  c.params = encoder::init_params<float>(enc, derive_seed(train.seed, kInitStream));
  c.optimizer = OptimizerState::for_params(c.params);
  c.vocab = std::move(vocab);
  c.codebook = std::move(codebook);
  return c;
}

TrainResult train(Checkpoint start, const TrainData& data, const TrainOptions& options) {
  const TrainConfig& cfg = start.train;
  cfg.validate();
  const std::size_t stop = options.stop_at.value_or(cfg.total_steps);
  if (stop > cfg.total_steps) fail(ErrorKind::kConfig, "stop_at exceeds total_steps");
  if (start.step > stop) fail(ErrorKind::kConfig, "checkpoint is already past the requested stop step");

  std::ofstream metrics;
  if (!options.metrics_path.empty()) {
    if (options.metrics_path.has_parent_path()) std::filesystem::create_directories(options.metrics_path.parent_path());
    metrics.open(options.metrics_path, std::ios::app);
    if (!metrics) fail(ErrorKind::kIo, "cannot open metrics log " + options.metrics_path.string());
  }

  TrainResult result;
  encoder::EncoderParams<float> grads;
  for (std::size_t s = start.step; s < stop; ++s) {
    const PairBatch batch = compose_batch(data.s2t, data.mt, cfg, s);
    EncodeOptions enc_opts;
    enc_opts.train = true;
    enc_opts.step_seed = derive_seed(cfg.seed, kDropoutStream, s);
    enc_opts.chunks = cfg.encode_chunks;
    enc_opts.threads = cfg.threads;
    const LossValue loss =
        batch_loss_and_grad(start.params, start.encoder, batch, cfg.lambda_spreadout, enc_opts, grads);
    if (!std::isfinite(loss.total)) {
      fail(ErrorKind::kNumeric, "non-finite loss at step " + std::to_string(s) + "; last checkpoint kept");
    }
    const double lr = lr_at(s, cfg);
    adam_step(start.params, grads, start.optimizer, lr);
    start.step = s + 1;

    StepRecord rec{s, lr, loss.total, loss.contrastive, loss.spreadout, batch.count(Task::kS2T),
                   batch.count(Task::kMT), nullptr};
    if (options.eval && cfg.eval_every > 0 && start.step % cfg.eval_every == 0) {
      rec.eval = options.eval(start.params, start.step);
    }
    if (metrics) metrics << rec.to_json().dump() << '\n' << std::flush;
    if (options.log_every > 0 && (s % options.log_every == 0 || start.step == stop)) {
      spdlog::info("step {} lr {:.3g} loss {:.4f} (contrastive {:.4f}, spreadout {:.4f})", s, lr, loss.total,
                   loss.contrastive, loss.spreadout);
    }
    result.records.push_back(std::move(rec));
    if (cfg.checkpoint_every > 0 && start.step % cfg.checkpoint_every == 0 && start.step != stop) {
      write_checkpoint(start, options.checkpoint_dir);
    }
  }
  write_checkpoint(start, options.checkpoint_dir);
  result.last = std::move(start);
  return result;
}

}  // namespace dualspeech::train
