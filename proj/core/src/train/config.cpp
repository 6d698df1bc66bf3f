#include "dualspeech/train/config.hpp"

#include <nlohmann/json.hpp>

#include "dualspeech/common/error.hpp"

namespace dualspeech::train {

TrainConfig TrainConfig::full_scale() {
  TrainConfig c;
  c.peak_lr = 1e-3;
  c.warmup_steps = 2500;
  c.total_steps = 100000;
  c.batch_size = 1024;
  c.mt_fraction = 0.25;
  return c;
}

void TrainConfig::validate() const {
  auto bad = [](const std::string& msg) { fail(ErrorKind::kConfig, "train config: " + msg); };
  if (!(mt_fraction >= 0.0 && mt_fraction <= 1.0)) bad("mt_fraction must be in [0,1]");
  if (warmup_steps > total_steps) bad("warmup_steps exceeds total_steps");
  if (batch_size < 2) bad("batch_size must be >= 2");
  if (!(peak_lr >= 0.0)) bad("peak_lr must be non-negative");
  if (!(lambda_spreadout >= 0.0)) bad("lambda_spreadout must be non-negative");
  if (encode_chunks == 0) bad("encode_chunks must be positive");
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"peak_lr", c.peak_lr},
          {"warmup_steps", c.warmup_steps},
          {"total_steps", c.total_steps},
          {"batch_size", c.batch_size},
          {"lambda_spreadout", c.lambda_spreadout},
          {"mt_fraction", c.mt_fraction},
          {"seed", c.seed},
          {"eval_every", c.eval_every},
          {"checkpoint_every", c.checkpoint_every},
          {"encode_chunks", c.encode_chunks},
          {"threads", c.threads}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  try {
    c.peak_lr = j.value("peak_lr", c.peak_lr);
    c.warmup_steps = j.value("warmup_steps", c.warmup_steps);
    c.total_steps = j.value("total_steps", c.total_steps);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.lambda_spreadout = j.value("lambda_spreadout", c.lambda_spreadout);
    c.mt_fraction = j.value("mt_fraction", c.mt_fraction);
    c.seed = j.value("seed", c.seed);
    c.eval_every = j.value("eval_every", c.eval_every);
    c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
    c.encode_chunks = j.value("encode_chunks", c.encode_chunks);
    c.threads = j.value("threads", c.threads);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kConfig, std::string("train config: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace dualspeech::train
