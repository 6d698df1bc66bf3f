#include "dualspeech/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <regex>

#include "dualspeech/common/error.hpp"

namespace dualspeech::eval {

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::size_t i = 0;
  auto space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
  while (i < text.size()) {
    while (i < text.size() && space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !space(text[i])) ++i;
    if (i > start) words.emplace_back(text.substr(start, i - start));
  }
  return words;
}

std::size_t levenshtein(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double wer(std::span<const std::string> reference, std::span<const std::string> hypothesis) {
  if (reference.empty()) fail(ErrorKind::kValidation, "wer: empty reference");
  return static_cast<double>(levenshtein(reference, hypothesis)) / static_cast<double>(reference.size());
}

double wer(std::string_view reference, std::string_view hypothesis) {
  return wer(split_words(reference), split_words(hypothesis));
}

void WerAccumulator::add(std::string_view reference, std::string_view hypothesis) {
  const auto ref = split_words(reference);
  if (ref.empty()) fail(ErrorKind::kValidation, "wer: empty reference");
  edits_ += levenshtein(ref, split_words(hypothesis));
  words_ += ref.size();
}

double WerAccumulator::value() const {
  return words_ == 0 ? 0.0 : static_cast<double>(edits_) / static_cast<double>(words_);
}

namespace {

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

}  // namespace

std::vector<std::string> tokenize_13a(std::string_view line) {
  static const std::regex punct(R"(([\{-\~\[-\` -\&\(-\+\:-\@\/]))");
  static const std::regex period_after(R"(([^0-9])([\.,]))");
  static const std::regex period_before(R"(([\.,])([^0-9]))");
  static const std::regex digit_dash(R"(([0-9])(-))");

  std::string s(line);
  replace_all(s, "<skipped>", "");
  replace_all(s, "-\n", "");
  replace_all(s, "\n", " ");
  if (s.find('&') != std::string::npos) {
    replace_all(s, "&quot;", "\"");
    replace_all(s, "&amp;", "&");
    replace_all(s, "&lt;", "<");
    replace_all(s, "&gt;", ">");
  }
  s = " " + s + " ";
  s = std::regex_replace(s, punct, " $1 ");
  s = std::regex_replace(s, period_after, "$1 $2 ");
  s = std::regex_replace(s, period_before, " $1 $2");
  s = std::regex_replace(s, digit_dash, "$1 $2 ");
  return split_words(s);
}

void BleuStats::add(std::span<const std::string> hyp, std::span<const std::string> ref) {
  hyp_len += hyp.size();
  ref_len += ref.size();
  for (std::size_t n = 1; n <= 4; ++n) {
    std::map<std::vector<std::string>, std::size_t> ref_counts;
    for (std::size_t i = 0; i + n <= ref.size(); ++i) ++ref_counts[{ref.begin() + i, ref.begin() + i + n}];
    std::map<std::vector<std::string>, std::size_t> hyp_counts;
    for (std::size_t i = 0; i + n <= hyp.size(); ++i) ++hyp_counts[{hyp.begin() + i, hyp.begin() + i + n}];
    for (const auto& [gram, count] : hyp_counts) {
      const auto it = ref_counts.find(gram);
      if (it != ref_counts.end()) matches[n - 1] += std::min(count, it->second);
      totals[n - 1] += count;
    }
  }
}

double BleuStats::score() const {
  if (hyp_len == 0) return 0.0;
  double log_sum = 0.0;
  for (std::size_t n = 0; n < 4; ++n) {
    if (matches[n] == 0 || totals[n] == 0) return 0.0;
    log_sum += std::log(static_cast<double>(matches[n]) / static_cast<double>(totals[n]));
  }
  const double bp =
      std::exp(std::min(0.0, 1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len)));
  return 100.0 * bp * std::exp(log_sum / 4.0);
}

double corpus_bleu(std::span<const std::string> hypotheses, std::span<const std::string> references) {
  if (hypotheses.size() != references.size()) {
    fail(ErrorKind::kValidation, "corpus_bleu: " + std::to_string(hypotheses.size()) + " hypotheses but " +
                                     std::to_string(references.size()) + " references");
  }
  BleuStats stats;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    stats.add(tokenize_13a(hypotheses[i]), tokenize_13a(references[i]));
  }
  if (stats.ref_len == 0) fail(ErrorKind::kValidation, "corpus_bleu: all references are empty");
  return stats.score();
}

}  // namespace dualspeech::eval
