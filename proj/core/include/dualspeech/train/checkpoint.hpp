#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "dualspeech/audio/codebook.hpp"
#include "dualspeech/encoder/encoder.hpp"
#include "dualspeech/train/adam.hpp"
#include "dualspeech/train/config.hpp"
#include "dualspeech/vocab/text_vocab.hpp"

namespace dualspeech::train {

/// Everything needed to resume training or to run evaluation. The vocabulary
/// and codebook travel with the weights so a checkpoint is self-contained.
struct Checkpoint {
  encoder::EncoderConfig encoder;
  TrainConfig train;
  std::size_t step = 0;  ///< completed optimizer steps
  encoder::EncoderParams<float> params;
  OptimizerState optimizer;
  std::optional<vocab::UnifiedVocab> vocab;
  std::optional<audio::Codebook> codebook;
};

/// File layout:
///   "DSCKPT01" | u64 manifest length | manifest JSON | f32 payload
/// The manifest lists every array by name with shape, element offset and
/// count, plus an FNV-1a 64 hash of the payload bytes.
std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::string_view bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);
/// Also verifies that the stored architecture hashes equal to `expected`.
Checkpoint load_checkpoint(const std::filesystem::path& path, const encoder::EncoderConfig& expected);

}  // namespace dualspeech::train
