#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dualspeech/vocab/languages.hpp"
#include "dualspeech/vocab/text_vocab.hpp"

namespace dualspeech::vocab {

enum class Modality { kSpeech, kText };

std::string_view modality_name(Modality m);

/// Unified ids: prefix ids in [0, t); payload ids in [0, t) for text and in
/// [t, t + a) for speech.
struct TokenSequence {
  std::vector<int> ids;
  Modality modality = Modality::kText;
  std::string language;
  std::size_t prefix_length = 0;

  std::span<const int> prefix() const { return {ids.data(), prefix_length}; }
  std::span<const int> payload() const { return std::span<const int>(ids).subspan(prefix_length); }
  bool has_payload() const { return ids.size() > prefix_length; }
};

/// Maps audio token k to unified id t + k.
std::vector<int> offset_audio(std::span<const int> tokens, std::size_t t, std::size_t a);
/// Inverse of offset_audio.
std::vector<int> remove_audio_offset(std::span<const int> ids, std::size_t t, std::size_t a);

/// "[English Speech]", "[French Text]".
std::string render_prefix(std::string_view language, Modality modality,
                          const LanguageRegistry& registry = LanguageRegistry::fleurs());

constexpr std::size_t kDefaultMaxLength = 256;

/// Prefix ids followed by offset audio tokens. Sequences longer than
/// max_length are cut from the right with a warning.
TokenSequence build_speech_input(std::string_view language, std::span<const int> audio_tokens,
                                 const UnifiedVocab& vocab, std::size_t max_length = kDefaultMaxLength,
                                 const LanguageRegistry& registry = LanguageRegistry::fleurs());

TokenSequence build_text_input(std::string_view language, std::string_view text, const UnifiedVocab& vocab,
                               std::size_t max_length = kDefaultMaxLength,
                               const LanguageRegistry& registry = LanguageRegistry::fleurs());

/// Checks the modality range invariants; throws a vocabulary error on violation.
void check_ranges(const TokenSequence& seq, std::size_t t, std::size_t a);

}  // namespace dualspeech::vocab
