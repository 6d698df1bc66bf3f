#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>

#include "dualspeech/eval/evaluate.hpp"
#include "dualspeech/vocab/languages.hpp"

namespace dualspeech::eval {

nlohmann::json to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);

/// One row per language family: family, languages, mean R@1, mean WER, mean
/// BLEU (unweighted over the family's languages). Codes missing from the
/// registry fall under "Other".
std::string render_group_csv(const EvalReport& report,
                             const vocab::LanguageRegistry& registry = vocab::LanguageRegistry::fleurs());

/// One row per language: code, name, family, count, r_at_1, wer, bleu.
std::string render_language_tsv(const EvalReport& report,
                                const vocab::LanguageRegistry& registry = vocab::LanguageRegistry::fleurs());

void save_report(const EvalReport& report, const std::filesystem::path& path);
EvalReport load_report(const std::filesystem::path& path);

}  // namespace dualspeech::eval
