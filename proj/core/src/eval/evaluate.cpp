#include "dualspeech/eval/evaluate.hpp"

#include <map>

#include "dualspeech/common/error.hpp"
#include "dualspeech/eval/metrics.hpp"
#include "dualspeech/eval/retrieval.hpp"
#include "dualspeech/train/step.hpp"

namespace dualspeech::eval {

namespace {

enum class Scoring { kWer, kBleu };

EvalReport evaluate(const encoder::EncoderParams<float>& params, const encoder::EncoderConfig& cfg,
                    const std::vector<RetrievalExample>& examples, const EvalOptions& options, Scoring scoring) {
  if (examples.empty()) fail(ErrorKind::kData, "evaluation set is empty");
  std::map<std::string, std::vector<const RetrievalExample*>> by_language;
  for (const auto& ex : examples) by_language[ex.language].push_back(&ex);

  train::EncodeOptions enc;
  enc.chunks = options.chunks;
  enc.threads = options.threads;

  EvalReport report;
  report.task = scoring == Scoring::kWer ? "s2t" : "s2tt";
  double r_sum = 0.0, metric_sum = 0.0;
  for (const auto& [language, group] : by_language) {
    std::vector<vocab::TokenSequence> queries, candidates;
    for (const auto* ex : group) {
      queries.push_back(ex->query);
      candidates.push_back(ex->candidate);
    }
    const auto q = train::encode_batch(params, cfg, std::span<const vocab::TokenSequence>(queries), enc, 0);
    const auto c = train::encode_batch(params, cfg, std::span<const vocab::TokenSequence>(candidates), enc, 1);

    RetrievalIndex index(cfg.p);
    for (std::size_t i = 0; i < group.size(); ++i) index.add(c.row(i), group[i]->candidate_text, language);

    std::size_t hits = 0;
    WerAccumulator wer_acc;
    std::vector<std::string> hyps, refs;
    for (std::size_t i = 0; i < group.size(); ++i) {
      const std::size_t top = retrieve_top_k(q.row(i), index, 1).front();
      hits += top == i;
      if (scoring == Scoring::kWer) {
        wer_acc.add(group[i]->candidate_text, index.text(top));
      } else {
        hyps.push_back(index.text(top));
        refs.push_back(group[i]->candidate_text);
      }
    }
    LanguageResult res;
    res.language = language;
    res.count = group.size();
    res.r_at_1 = static_cast<double>(hits) / static_cast<double>(group.size());
    if (scoring == Scoring::kWer) {
      res.wer = wer_acc.value();
      metric_sum += *res.wer;
    } else {
      res.bleu = corpus_bleu(hyps, refs);
      metric_sum += *res.bleu;
    }
    r_sum += res.r_at_1;
    report.languages.push_back(std::move(res));
  }
  const double n = static_cast<double>(report.languages.size());
  report.r_at_1 = r_sum / n;
  if (scoring == Scoring::kWer) report.wer = metric_sum / n;
  else report.bleu = metric_sum / n;
  return report;
}

}  // namespace

EvalReport evaluate_s2t(const encoder::EncoderParams<float>& params, const encoder::EncoderConfig& cfg,
                        const std::vector<RetrievalExample>& examples, const EvalOptions& options) {
  return evaluate(params, cfg, examples, options, Scoring::kWer);
}

EvalReport evaluate_s2tt(const encoder::EncoderParams<float>& params, const encoder::EncoderConfig& cfg,
                         const std::vector<RetrievalExample>& examples, const EvalOptions& options) {
  return evaluate(params, cfg, examples, options, Scoring::kBleu);
}

}  // namespace dualspeech::eval
