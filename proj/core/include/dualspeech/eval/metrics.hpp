#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dualspeech::eval {

/// Splits on runs of ASCII whitespace.
std::vector<std::string> split_words(std::string_view text);

/// Word-level edit distance with unit substitution, insertion and deletion costs.
std::size_t levenshtein(std::span<const std::string> a, std::span<const std::string> b);

/// (S + D + I) / |reference|. Can exceed 1. Throws a validation error for an
/// empty reference.
double wer(std::span<const std::string> reference, std::span<const std::string> hypothesis);
double wer(std::string_view reference, std::string_view hypothesis);

/// Corpus-level WER: total edits over total reference words.
class WerAccumulator {
 public:
  void add(std::string_view reference, std::string_view hypothesis);
  double value() const;
  std::size_t edits() const { return edits_; }
  std::size_t reference_words() const { return words_; }

 private:
  std::size_t edits_ = 0;
  std::size_t words_ = 0;
};

/// mteval-v13a tokenization: unescape &quot; &amp; &lt; &gt;, isolate
/// punctuation, split periods and commas except next to digits, split a
/// dash after a digit. Case is preserved.
std::vector<std::string> tokenize_13a(std::string_view line);

struct BleuStats {
  std::array<std::size_t, 4> matches{};
  std::array<std::size_t, 4> totals{};
  std::size_t hyp_len = 0;
  std::size_t ref_len = 0;

  void add(std::span<const std::string> hypothesis, std::span<const std::string> reference);
  /// 100 * BP * exp(mean log p_n); 0 when any p_n is 0 (no smoothing).
  double score() const;
};

/// 4-gram corpus BLEU over 13a tokens with one reference per hypothesis.
double corpus_bleu(std::span<const std::string> hypotheses, std::span<const std::string> references);

}  // namespace dualspeech::eval
