#include "dualspeech/vocab/text_vocab.hpp"

#include <map>
#include <nlohmann/json.hpp>

#include "dualspeech/common/error.hpp"
#include "dualspeech/common/io.hpp"

namespace dualspeech::vocab {
namespace {

std::uint64_t pair_key(int left, int right) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(left)) << 32) | static_cast<std::uint32_t>(right);
}

// Chunks start at every space so merges never cross a word boundary, except
// that a word keeps its leading space.
std::vector<std::string_view> split_chunks(std::string_view text) {
  std::vector<std::string_view> chunks;
  std::size_t start = 0;
  for (std::size_t i = 1; i < text.size(); ++i) {
    if (text[i] == ' ' && text[i - 1] != ' ') {
      chunks.push_back(text.substr(start, i - start));
      start = i;
    }
  }
  if (start < text.size()) chunks.push_back(text.substr(start));
  return chunks;
}

}  // namespace

TextVocab TextVocab::byte_level() {
  TextVocab v;
  v.pieces_.resize(kFirstMerge);
  for (int b = 0; b < 256; ++b) v.pieces_[static_cast<std::size_t>(b)] = std::string(1, static_cast<char>(b));
  return v;
}

void TextVocab::add_merge(int left, int right) {
  const int id = static_cast<int>(size());
  merges_.emplace_back(left, right);
  pieces_.push_back(pieces_[static_cast<std::size_t>(left)] + pieces_[static_cast<std::size_t>(right)]);
  merge_ids_.emplace(pair_key(left, right), id);
}

TextVocab TextVocab::from_merges(std::vector<std::pair<int, int>> merges) {
  TextVocab v = byte_level();
  for (auto [l, r] : merges) {
    const int limit = static_cast<int>(v.size());
    const auto valid = [&](int id) { return (id >= 0 && id < 256) || (id >= kFirstMerge && id < limit); };
    if (!valid(l) || !valid(r)) {
      fail(ErrorKind::kVocabulary, "merge (" + std::to_string(l) + "," + std::to_string(r) +
                                       ") references an id that is not a byte or earlier merge");
    }
    v.add_merge(l, r);
  }
  return v;
}

TextVocab TextVocab::train_subword(std::span<const std::string> corpus, std::size_t num_merges) {
  TextVocab v = byte_level();
  std::map<std::string, long> chunk_counts;
  for (const auto& line : corpus) {
    for (auto chunk : split_chunks(line)) ++chunk_counts[std::string(chunk)];
  }
  std::vector<std::vector<int>> words;
  std::vector<long> freq;
  for (const auto& [chunk, count] : chunk_counts) {
    std::vector<int> ids;
    for (unsigned char c : chunk) ids.push_back(c);
    words.push_back(std::move(ids));
    freq.push_back(count);
  }

  for (std::size_t m = 0; m < num_merges; ++m) {
    std::map<std::pair<int, int>, long> pair_counts;
    for (std::size_t w = 0; w < words.size(); ++w) {
      const auto& ids = words[w];
      for (std::size_t i = 0; i + 1 < ids.size(); ++i) pair_counts[{ids[i], ids[i + 1]}] += freq[w];
    }
    std::pair<int, int> best{-1, -1};
    long best_count = 1;
    for (const auto& [p, c] : pair_counts) {
      if (c > best_count) {
        best = p;
        best_count = c;
      }
    }
    if (best.first < 0) break;
    const int new_id = static_cast<int>(v.size());
    v.add_merge(best.first, best.second);
    for (auto& ids : words) {
      std::vector<int> merged;
      merged.reserve(ids.size());
      for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i + 1 < ids.size() && ids[i] == best.first && ids[i + 1] == best.second) {
          merged.push_back(new_id);
          ++i;
        } else {
          merged.push_back(ids[i]);
        }
      }
      ids = std::move(merged);
    }
  }
  return v;
}

void TextVocab::encode_chunk(std::string_view chunk, std::vector<int>& out) const {
  std::vector<int> ids;
  ids.reserve(chunk.size());
  for (unsigned char c : chunk) ids.push_back(c);
  if (!merges_.empty()) {
    for (;;) {
      int best_id = -1;
      std::size_t best_pos = 0;
      for (std::size_t i = 0; i + 1 < ids.size(); ++i) {
        auto it = merge_ids_.find(pair_key(ids[i], ids[i + 1]));
        if (it != merge_ids_.end() && (best_id < 0 || it->second < best_id)) {
          best_id = it->second;
          best_pos = i;
        }
      }
      if (best_id < 0) break;
      ids[best_pos] = best_id;
      ids.erase(ids.begin() + static_cast<std::ptrdiff_t>(best_pos) + 1);
    }
  }
  out.insert(out.end(), ids.begin(), ids.end());
}

std::vector<int> TextVocab::tokenize(std::string_view text) const {
  std::vector<int> out;
  out.reserve(text.size());
  if (merges_.empty()) {
    for (unsigned char c : text) out.push_back(c);
    return out;
  }
  for (auto chunk : split_chunks(text)) encode_chunk(chunk, out);
  return out;
}

std::vector<int> TextVocab::tokenize_prefix(std::string_view label) const {
  std::vector<int> out{kPrefixOpen};
  auto body = tokenize(label);
  out.insert(out.end(), body.begin(), body.end());
  out.push_back(kPrefixClose);
  return out;
}

std::string TextVocab::detokenize(std::span<const int> ids) const {
  std::string out;
  for (int id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= size()) {
      fail(ErrorKind::kVocabulary, "detokenize: id " + std::to_string(id) + " outside text vocabulary of size " +
                                       std::to_string(size()));
    }
    switch (id) {
      case kPad: break;
      case kUnk: out += "\xEF\xBF\xBD"; break;
      case kPrefixOpen: out += '['; break;
      case kPrefixClose: out += ']'; break;
      default: out += pieces_[static_cast<std::size_t>(id)];
    }
  }
  return out;
}

nlohmann::json vocab_to_json(const UnifiedVocab& vocab) {
  nlohmann::json merges = nlohmann::json::array();
  for (auto [l, r] : vocab.text.merges()) merges.push_back({l, r});
  return {{"mode", vocab.text.mode() == TokenizerMode::kByte ? "byte" : "subword"},
          {"t", vocab.t()},
          {"a", vocab.a()},
          {"specials",
           {{"<pad>", TextVocab::kPad},
            {"<unk>", TextVocab::kUnk},
            {"<prefix_open>", TextVocab::kPrefixOpen},
            {"<prefix_close>", TextVocab::kPrefixClose}}},
          {"merges", merges}};
}

UnifiedVocab vocab_from_json(const nlohmann::json& j) {
  try {
    std::vector<std::pair<int, int>> merges;
    for (const auto& m : j.at("merges")) merges.emplace_back(m.at(0).get<int>(), m.at(1).get<int>());
    UnifiedVocab v{TextVocab::from_merges(std::move(merges)), j.at("a").get<std::size_t>()};
    if (j.at("t").get<std::size_t>() != v.t()) {
      fail(ErrorKind::kIntegrity, "vocab: declared t=" + std::to_string(j.at("t").get<std::size_t>()) +
                                      " but merges imply t=" + std::to_string(v.t()));
    }
    const auto& sp = j.at("specials");
    if (sp.at("<pad>") != TextVocab::kPad || sp.at("<unk>") != TextVocab::kUnk ||
        sp.at("<prefix_open>") != TextVocab::kPrefixOpen || sp.at("<prefix_close>") != TextVocab::kPrefixClose) {
      fail(ErrorKind::kIntegrity, "vocab: special token ids differ from this build's layout");
    }
    return v;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kParse, std::string("vocab: ") + e.what());
  }
}

void save_vocab(const UnifiedVocab& vocab, const std::filesystem::path& path) {
  io::write_file_atomic(path, vocab_to_json(vocab).dump(2) + "\n");
}

UnifiedVocab load_vocab(const std::filesystem::path& path) {
  const std::string text = io::read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kParse, path.string() + ": " + e.what());
  }
  return vocab_from_json(j);
}

}  // namespace dualspeech::vocab
