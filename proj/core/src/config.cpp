#include "dualspeech/config.hpp"

#include <nlohmann/json.hpp>
#include <set>

#include "dualspeech/common/error.hpp"
#include "dualspeech/common/io.hpp"

namespace dualspeech {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& keys, const std::string& section) {
  if (!j.is_object()) fail(ErrorKind::kConfig, section + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!keys.count(key)) fail(ErrorKind::kConfig, section + ": unknown key '" + key + "'");
  }
}

}  // namespace

void AppConfig::set_seed(std::uint64_t s) {
  seed = s;
  codebook.seed = s;
  train.seed = s;
  synthetic.seed = s;
}

json to_json(const AppConfig& c) {
  return {{"seed", c.seed},
          {"codebook",
           {{"k", c.codebook.k}, {"max_iters", c.codebook.max_iters}, {"frame_rate_hz", c.codebook.frame_rate_hz}}},
          {"vocab",
           {{"mode", c.vocab.mode == vocab::TokenizerMode::kByte ? "byte" : "subword"},
            {"merges", c.vocab.merges},
            {"max_length", c.vocab.max_length}}},
          {"encoder", encoder::to_json(c.encoder)},
          {"train", train::to_json(c.train)},
          {"synthetic", corpus::to_json(c.synthetic)}};
}

AppConfig app_config_from_json(const json& j) {
  reject_unknown(j, {"seed", "codebook", "vocab", "encoder", "train", "synthetic"}, "config");
  AppConfig c;
  try {
    if (j.contains("codebook")) {
      const json& s = j.at("codebook");
      reject_unknown(s, {"k", "max_iters", "frame_rate_hz"}, "codebook");
      c.codebook.k = s.value("k", c.codebook.k);
      c.codebook.max_iters = s.value("max_iters", c.codebook.max_iters);
      c.codebook.frame_rate_hz = s.value("frame_rate_hz", c.codebook.frame_rate_hz);
    }
    if (j.contains("vocab")) {
      const json& s = j.at("vocab");
      reject_unknown(s, {"mode", "merges", "max_length"}, "vocab");
      const std::string mode = s.value("mode", std::string("subword"));
      if (mode == "byte") c.vocab.mode = vocab::TokenizerMode::kByte;
      else if (mode == "subword") c.vocab.mode = vocab::TokenizerMode::kSubword;
      else fail(ErrorKind::kConfig, "vocab: unknown mode '" + mode + "'");
      c.vocab.merges = s.value("merges", c.vocab.merges);
      c.vocab.max_length = s.value("max_length", c.vocab.max_length);
    }
    if (j.contains("encoder")) {
      reject_unknown(j.at("encoder"),
                     {"t", "a", "m", "layers", "heads", "ffn_width", "p", "dropout", "attention", "pooling",
                      "activation", "max_len", "layer_norm_eps"},
                     "encoder");
      c.encoder = encoder::encoder_config_from_json(j.at("encoder"));
    }
    if (j.contains("train")) {
      reject_unknown(j.at("train"),
                     {"peak_lr", "warmup_steps", "total_steps", "batch_size", "lambda_spreadout", "mt_fraction",
                      "seed", "eval_every", "checkpoint_every", "encode_chunks", "threads"},
                     "train");
      c.train = train::train_config_from_json(j.at("train"));
    }
    if (j.contains("synthetic")) c.synthetic = corpus::synthetic_spec_from_json(j.at("synthetic"));
    if (j.contains("seed")) c.set_seed(j.at("seed").get<std::uint64_t>());
  } catch (const json::exception& e) {
    fail(ErrorKind::kConfig, std::string("config: ") + e.what());
  }
  return c;
}

AppConfig load_app_config(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::exception& e) {
    fail(ErrorKind::kParse, path.string() + ": " + e.what());
  }
  return app_config_from_json(j);
}

}  // namespace dualspeech
