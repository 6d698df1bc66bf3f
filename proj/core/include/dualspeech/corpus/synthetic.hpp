#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <nlohmann/json_fwd.hpp>
#include <string>
#include <utility>
#include <vector>

#include "dualspeech/corpus/dataset.hpp"
#include "dualspeech/corpus/manifest.hpp"

namespace dualspeech::corpus {

using LanguagePair = std::pair<std::string, std::string>;

/// Generator settings. A sentence is a list of distinct concept ids shared by
/// all languages. Its text in language L is the surface words of L for each
/// concept followed by " ."; its speech in L is frames_per_concept frames per
/// concept of base[c] + shift[L] + N(0, noise_std^2).
struct SyntheticSpec {
  std::vector<std::string> languages{"fr", "de"};
  std::vector<std::string> speech_languages;  ///< empty: every language has speech
  std::size_t vocab_size = 64;                ///< concepts
  std::size_t min_concepts = 2;
  std::size_t max_concepts = 5;
  std::size_t frames_per_concept = 4;
  std::size_t frame_dim = 16;
  double noise_std = 0.1;
  double language_shift_std = 0.05;
  float frame_rate_hz = 25.0f;
  std::size_t min_word_length = 3;
  std::size_t max_word_length = 6;
  std::size_t train_per_language = 512;  ///< s2t train pairs per speech language
  std::size_t test_per_language = 128;   ///< s2t test pairs per speech language
  std::vector<LanguagePair> mt_pairs;    ///< (source text, target text)
  std::size_t mt_per_pair = 512;
  std::vector<LanguagePair> s2tt_pairs;  ///< (source speech, target text), test only
  std::size_t s2tt_per_pair = 128;
  std::uint64_t seed = 0;

  void validate() const;
};

nlohmann::json to_json(const SyntheticSpec& spec);
SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j);

struct SyntheticCorpus {
  SyntheticSpec spec;
  std::vector<ManifestRecord> train_s2t;
  std::vector<ManifestRecord> test_s2t;
  std::vector<ManifestRecord> train_mt;
  std::vector<ManifestRecord> test_s2tt;
  std::map<std::string, std::vector<std::string>> surface;  ///< language -> word per concept
  std::map<std::string, std::vector<float>> frames;         ///< frames_path -> frames

  /// Serves frames from memory.
  FrameLoader loader() const;
};

/// Deterministic in spec (including seed). Sentences are unique across all
/// splits, so every test item is unseen in training.
SyntheticCorpus generate_synthetic_corpus(const SyntheticSpec& spec);

/// Writes spec.json, train_s2t.jsonl, test_s2t.jsonl, train_mt.jsonl,
/// test_s2tt.jsonl, surface.json and frames/<id>.dspf under `dir`.
void write_synthetic_corpus(const SyntheticCorpus& corpus, const std::filesystem::path& dir);

}  // namespace dualspeech::corpus
