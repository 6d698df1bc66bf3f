#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json_fwd.hpp>
#include <string>

#include "dualspeech/audio/codebook.hpp"
#include "dualspeech/corpus/synthetic.hpp"
#include "dualspeech/encoder/encoder.hpp"
#include "dualspeech/train/config.hpp"

namespace dualspeech {

struct VocabSettings {
  vocab::TokenizerMode mode = vocab::TokenizerMode::kSubword;
  std::size_t merges = 256;  ///< subword merges learned from the training texts
  std::size_t max_length = vocab::kDefaultMaxLength;
  bool operator==(const VocabSettings&) const = default;
};

/// The single declarative config file used by the command-line tool:
///   {"seed", "codebook": {k, max_iters, frame_rate_hz}, "vocab": {mode,
///    merges, max_length}, "encoder": {...}, "train": {...}, "synthetic": {...}}
/// Every section is optional. Unknown keys are rejected. The top-level seed
/// overrides the seeds of the codebook, train and synthetic sections.
struct AppConfig {
  std::uint64_t seed = 0;
  audio::KMeansOptions codebook;
  VocabSettings vocab;
  encoder::EncoderConfig encoder;
  train::TrainConfig train;
  corpus::SyntheticSpec synthetic;

  /// Propagates `s` to every seeded component.
  void set_seed(std::uint64_t s);
};

nlohmann::json to_json(const AppConfig& cfg);
AppConfig app_config_from_json(const nlohmann::json& j);
AppConfig load_app_config(const std::filesystem::path& path);

}  // namespace dualspeech
