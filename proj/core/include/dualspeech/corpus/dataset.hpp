#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "dualspeech/audio/codebook.hpp"
#include "dualspeech/corpus/manifest.hpp"
#include "dualspeech/eval/evaluate.hpp"
#include "dualspeech/train/batching.hpp"
#include "dualspeech/vocab/inputs.hpp"

namespace dualspeech::corpus {

/// Returns the frames of a record with a frames_path.
using FrameLoader = std::function<audio::FrameSequence(const ManifestRecord&)>;

/// Reads frame files relative to `base_dir`. A missing or unreadable file
/// raises a data error naming the record.
FrameLoader file_frame_loader(std::filesystem::path base_dir);

struct InputContext {
  const vocab::UnifiedVocab& vocab;
  const audio::Codebook& codebook;
  std::size_t max_length = vocab::kDefaultMaxLength;
  const vocab::LanguageRegistry& registry = vocab::LanguageRegistry::fleurs();
};

vocab::TokenSequence speech_input(const ManifestRecord& record, const FrameLoader& frames, const InputContext& ctx);

/// Speech in the record's language paired with its transcript.
std::vector<train::TrainingPair> s2t_pairs(const std::vector<ManifestRecord>& records, const FrameLoader& frames,
                                           const InputContext& ctx);
/// Source text paired with the target-language translation.
std::vector<train::TrainingPair> mt_pairs(const std::vector<ManifestRecord>& records, const InputContext& ctx);

/// Speech queries against transcripts (s2t records).
std::vector<eval::RetrievalExample> s2t_examples(const std::vector<ManifestRecord>& records,
                                                 const FrameLoader& frames, const InputContext& ctx);
/// Speech queries against translations (s2tt records).
std::vector<eval::RetrievalExample> s2tt_examples(const std::vector<ManifestRecord>& records,
                                                  const FrameLoader& frames, const InputContext& ctx);

/// Every transcript and translation, in record order. With
/// `with_prefix_labels`, each input's prefix label ("French Speech",
/// "English Text") is added too, so subword merges also cover prefixes.
std::vector<std::string> collect_texts(const std::vector<ManifestRecord>& records, bool with_prefix_labels = false,
                                       const vocab::LanguageRegistry& registry = vocab::LanguageRegistry::fleurs());

/// Concatenated frames of every record with audio; `dim` receives the shared
/// width (a dimension error if records disagree).
std::vector<float> collect_frames(const std::vector<ManifestRecord>& records, const FrameLoader& frames,
                                  std::size_t& dim);

}  // namespace dualspeech::corpus
