#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "dualspeech/encoder/encoder.hpp"
#include "dualspeech/vocab/inputs.hpp"

namespace dualspeech::eval {

/// One query with its gold candidate. Candidates of all examples that share
/// `language` form that language's pool.
struct RetrievalExample {
  std::string id;
  std::string language;
  vocab::TokenSequence query;      ///< speech input
  vocab::TokenSequence candidate;  ///< gold transcript or translation input
  std::string candidate_text;      ///< raw text, scored by WER or BLEU
};

struct LanguageResult {
  std::string language;
  std::size_t count = 0;
  double r_at_1 = 0.0;
  std::optional<double> wer;   ///< corpus-level retrieval WER (S2T)
  std::optional<double> bleu;  ///< corpus BLEU of top-1 translations (S2TT)
};

/// Aggregates are unweighted means over languages.
struct EvalReport {
  std::string task;  ///< "s2t" or "s2tt"
  std::vector<LanguageResult> languages;  ///< sorted by language code
  double r_at_1 = 0.0;
  std::optional<double> wer;
  std::optional<double> bleu;
  nlohmann::json provenance = nlohmann::json::object();
};

struct EvalOptions {
  std::size_t chunks = 8;
  std::size_t threads = 0;
};

/// Per language: index every gold transcript, retrieve top-1 for every
/// speech query, report R@1 and WER of the retrieved text.
EvalReport evaluate_s2t(const encoder::EncoderParams<float>& params, const encoder::EncoderConfig& cfg,
                        const std::vector<RetrievalExample>& examples, const EvalOptions& options = {});

/// Same protocol over target-language translations, reporting R@1 and
/// corpus BLEU of the retrieved translations.
EvalReport evaluate_s2tt(const encoder::EncoderParams<float>& params, const encoder::EncoderConfig& cfg,
                         const std::vector<RetrievalExample>& examples, const EvalOptions& options = {});

}  // namespace dualspeech::eval
