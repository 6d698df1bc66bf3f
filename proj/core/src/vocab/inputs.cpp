#include "dualspeech/vocab/inputs.hpp"

#include <spdlog/spdlog.h>

#include "dualspeech/common/error.hpp"

namespace dualspeech::vocab {
namespace {

void truncate(TokenSequence& seq, std::size_t max_length) {
  if (seq.prefix_length >= max_length) {
    fail(ErrorKind::kConfig, "max_length " + std::to_string(max_length) + " leaves no room after a " +
                                 std::to_string(seq.prefix_length) + "-token prefix");
  }
  if (seq.ids.size() > max_length) {
    spdlog::warn("truncating {} {} input from {} to {} tokens", seq.language, modality_name(seq.modality),
                 seq.ids.size(), max_length);
    seq.ids.resize(max_length);
  }
}

}  // namespace

std::string_view modality_name(Modality m) { return m == Modality::kSpeech ? "Speech" : "Text"; }

std::vector<int> offset_audio(std::span<const int> tokens, std::size_t t, std::size_t a) {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (int k : tokens) {
    if (k < 0 || static_cast<std::size_t>(k) >= a) {
      fail(ErrorKind::kVocabulary,
           "audio token " + std::to_string(k) + " outside audio vocabulary of size " + std::to_string(a));
    }
    out.push_back(static_cast<int>(t) + k);
  }
  return out;
}

std::vector<int> remove_audio_offset(std::span<const int> ids, std::size_t t, std::size_t a) {
  std::vector<int> out;
  out.reserve(ids.size());
  for (int id : ids) {
    if (id < static_cast<int>(t) || static_cast<std::size_t>(id) >= t + a) {
      fail(ErrorKind::kVocabulary, "id " + std::to_string(id) + " is not in the audio range [" + std::to_string(t) +
                                       "," + std::to_string(t + a) + ")");
    }
    out.push_back(id - static_cast<int>(t));
  }
  return out;
}

std::string render_prefix(std::string_view language, Modality modality, const LanguageRegistry& registry) {
  return "[" + registry.at(language).name + " " + std::string(modality_name(modality)) + "]";
}

static std::string prefix_label(std::string_view language, Modality modality, const LanguageRegistry& registry) {
  return registry.at(language).name + " " + std::string(modality_name(modality));
}

TokenSequence build_speech_input(std::string_view language, std::span<const int> audio_tokens,
                                 const UnifiedVocab& vocab, std::size_t max_length,
                                 const LanguageRegistry& registry) {
  TokenSequence seq;
  seq.modality = Modality::kSpeech;
  seq.language = std::string(language);
  seq.ids = vocab.text.tokenize_prefix(prefix_label(language, Modality::kSpeech, registry));
  seq.prefix_length = seq.ids.size();
  auto payload = offset_audio(audio_tokens, vocab.t(), vocab.a());
  seq.ids.insert(seq.ids.end(), payload.begin(), payload.end());
  truncate(seq, max_length);
  return seq;
}

TokenSequence build_text_input(std::string_view language, std::string_view text, const UnifiedVocab& vocab,
                               std::size_t max_length, const LanguageRegistry& registry) {
  TokenSequence seq;
  seq.modality = Modality::kText;
  seq.language = std::string(language);
  seq.ids = vocab.text.tokenize_prefix(prefix_label(language, Modality::kText, registry));
  seq.prefix_length = seq.ids.size();
  auto payload = vocab.text.tokenize(text);
  seq.ids.insert(seq.ids.end(), payload.begin(), payload.end());
  truncate(seq, max_length);
  return seq;
}

void check_ranges(const TokenSequence& seq, std::size_t t, std::size_t a) {
  for (std::size_t i = 0; i < seq.ids.size(); ++i) {
    const int id = seq.ids[i];
    const bool in_text = id >= 0 && static_cast<std::size_t>(id) < t;
    const bool in_audio = id >= 0 && static_cast<std::size_t>(id) >= t && static_cast<std::size_t>(id) < t + a;
    const bool want_audio = seq.modality == Modality::kSpeech && i >= seq.prefix_length;
    if (want_audio ? !in_audio : !in_text) {
      fail(ErrorKind::kVocabulary, "id " + std::to_string(id) + " at position " + std::to_string(i) +
                                       " violates the " + std::string(modality_name(seq.modality)) +
                                       " range layout (t=" + std::to_string(t) + ", a=" + std::to_string(a) + ")");
    }
  }
}

}  // namespace dualspeech::vocab
