#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json_fwd.hpp>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace dualspeech::vocab {

enum class TokenizerMode { kByte, kSubword };

/// Text token ids, dense in [0, t):
///   0..255   raw bytes
///   256      <pad>
///   257      <unk>
///   258      <prefix_open>   rendered as '['
///   259      <prefix_close>  rendered as ']'
///   260..    subword merges, in merge order
/// Every byte has an id, so <unk> only appears when decoding foreign ids.
class TextVocab {
 public:
  static constexpr int kPad = 256;
  static constexpr int kUnk = 257;
  static constexpr int kPrefixOpen = 258;
  static constexpr int kPrefixClose = 259;
  static constexpr int kFirstMerge = 260;

  static TextVocab byte_level();
  /// Byte-pair merges learned from `corpus`; stops early when no pair occurs twice.
  static TextVocab train_subword(std::span<const std::string> corpus, std::size_t num_merges);
  static TextVocab from_merges(std::vector<std::pair<int, int>> merges);

  TokenizerMode mode() const { return merges_.empty() ? TokenizerMode::kByte : TokenizerMode::kSubword; }
  std::size_t size() const { return static_cast<std::size_t>(kFirstMerge) + merges_.size(); }
  const std::vector<std::pair<int, int>>& merges() const { return merges_; }

  std::vector<int> tokenize(std::string_view text) const;
  /// <prefix_open> label <prefix_close>, all ids < size().
  std::vector<int> tokenize_prefix(std::string_view label) const;
  std::string detokenize(std::span<const int> ids) const;

 private:
  void add_merge(int left, int right);
  void encode_chunk(std::string_view chunk, std::vector<int>& out) const;

  std::vector<std::pair<int, int>> merges_;
  std::vector<std::string> pieces_;  // bytes for every non-special id
  std::unordered_map<std::uint64_t, int> merge_ids_;
};

/// Text vocabulary plus the size of the audio token range [t, t + a).
struct UnifiedVocab {
  TextVocab text;
  std::size_t audio_size = 0;

  std::size_t t() const { return text.size(); }
  std::size_t a() const { return audio_size; }
  std::size_t total() const { return t() + a(); }
};

nlohmann::json vocab_to_json(const UnifiedVocab& vocab);
UnifiedVocab vocab_from_json(const nlohmann::json& j);
void save_vocab(const UnifiedVocab& vocab, const std::filesystem::path& path);
UnifiedVocab load_vocab(const std::filesystem::path& path);

}  // namespace dualspeech::vocab
