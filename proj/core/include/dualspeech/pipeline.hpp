#pragma once

#include <optional>
#include <vector>

#include "dualspeech/config.hpp"
#include "dualspeech/corpus/dataset.hpp"
#include "dualspeech/eval/evaluate.hpp"
#include "dualspeech/train/trainer.hpp"

namespace dualspeech {

/// Codebook and vocabulary fitted on training data.
struct Assets {
  audio::Codebook codebook;
  vocab::UnifiedVocab vocab;
};

/// k-means over every training frame, then the text vocabulary (byte level
/// or subword merges over transcripts, translations and prefix labels).
Assets fit_assets(const std::vector<corpus::ManifestRecord>& train_records, const corpus::FrameLoader& frames,
                  const AppConfig& cfg);

/// Byte-level or subword vocabulary per `settings`, sized for `audio_size` audio tokens.
vocab::UnifiedVocab build_vocab(const std::vector<corpus::ManifestRecord>& records, const VocabSettings& settings,
                                std::size_t audio_size);

/// Encoder config with t and a taken from the vocabulary.
encoder::EncoderConfig sized_encoder(encoder::EncoderConfig cfg, const vocab::UnifiedVocab& vocab);

/// Fresh step-0 checkpoint carrying the assets.
train::Checkpoint start_checkpoint(const AppConfig& cfg, const Assets& assets);

/// Tokenized S2T and MT training pairs for the checkpoint's assets.
train::TrainData build_train_data(const train::Checkpoint& ckpt, const std::vector<corpus::ManifestRecord>& records,
                                  const corpus::FrameLoader& frames, std::size_t max_length);

/// Evaluates a checkpoint on s2t or s2tt records. Records the checkpoint
/// step and config hash as provenance.
eval::EvalReport evaluate_checkpoint(const train::Checkpoint& ckpt, const std::vector<corpus::ManifestRecord>& records,
                                     const corpus::FrameLoader& frames, corpus::RecordTask task,
                                     std::size_t max_length = vocab::kDefaultMaxLength);

}  // namespace dualspeech
