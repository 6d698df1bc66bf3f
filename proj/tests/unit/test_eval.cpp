#include <gtest/gtest.h>

#include <filesystem>
#include <map>
#include <sstream>

#include "dualspeech/common/rng.hpp"
#include "dualspeech/eval/evaluate.hpp"
#include "dualspeech/eval/metrics.hpp"
#include "dualspeech/eval/report.hpp"

using namespace dualspeech;

namespace {

encoder::EncoderConfig tiny_encoder() {
  encoder::EncoderConfig c;
  c.t = 16;
  c.a = 8;
  c.m = 8;
  c.layers = 1;
  c.heads = 2;
  c.ffn_width = 16;
  c.p = 4;
  c.max_len = 12;
  return c;
}

std::vector<eval::RetrievalExample> random_examples(const encoder::EncoderConfig& c, Rng& rng) {
  static const char* kWords[] = {"ka", "lo", "mi", "ne", "su"};
  std::vector<eval::RetrievalExample> out;
  const char* langs[] = {"fr", "de", "xx"};
  for (int i = 0; i < 24; ++i) {
    eval::RetrievalExample e;
    e.id = "ex" + std::to_string(i);
    e.language = langs[i % 3];
    e.query.modality = vocab::Modality::kSpeech;
    e.query.ids.push_back(1);
    for (std::size_t k = 0; k < 1 + rng.below(5); ++k) e.query.ids.push_back(static_cast<int>(c.t + rng.below(c.a)));
    e.candidate.ids.push_back(2);
    for (std::size_t k = 0; k < 1 + rng.below(5); ++k) {
      e.candidate.ids.push_back(static_cast<int>(3 + rng.below(c.t - 3)));
      e.candidate_text += std::string(kWords[rng.below(5)]) + " ";
    }
    e.candidate_text += ".";
    out.push_back(std::move(e));
  }
  return out;
}

double dot(const std::vector<float>& a, const std::vector<float>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
  return s;
}

}  // namespace

TEST(Evaluate, S2tMatchesBruteForcePerLanguage) {
  const auto c = tiny_encoder();
  const auto params = encoder::init_params<float>(c, 21);
  Rng rng(22);
  const auto examples = random_examples(c, rng);
  const auto report = eval::evaluate_s2t(params, c, examples);
  EXPECT_EQ(report.task, "s2t");
  ASSERT_EQ(report.languages.size(), 3u);
  EXPECT_EQ(report.languages[0].language, "de");
  EXPECT_EQ(report.languages[2].language, "xx");

  double mean_r = 0, mean_w = 0;
  for (const auto& lang : report.languages) {
    std::vector<const eval::RetrievalExample*> pool;
    for (const auto& e : examples) {
      if (e.language == lang.language) pool.push_back(&e);
    }
    ASSERT_EQ(lang.count, pool.size());
    std::size_t hits = 0, edits = 0, words = 0;
    for (const auto* q : pool) {
      const auto qe = encoder::encode(params, c, q->query).values;
      std::size_t best = 0;
      double best_score = -1e300;
      for (std::size_t j = 0; j < pool.size(); ++j) {
        const double s = dot(qe, encoder::encode(params, c, pool[j]->candidate).values);
        if (s > best_score) {
          best_score = s;
          best = j;
        }
      }
      hits += pool[best] == q;
      const auto ref = eval::split_words(q->candidate_text);
      const auto hyp = eval::split_words(pool[best]->candidate_text);
      edits += eval::levenshtein(ref, hyp);
      words += ref.size();
    }
    const double r = static_cast<double>(hits) / static_cast<double>(pool.size());
    const double w = static_cast<double>(edits) / static_cast<double>(words);
    EXPECT_NEAR(lang.r_at_1, r, 1e-12) << lang.language;
    ASSERT_TRUE(lang.wer.has_value());
    EXPECT_NEAR(*lang.wer, w, 1e-12);
    mean_r += r / 3;
    mean_w += w / 3;
  }
  EXPECT_NEAR(report.r_at_1, mean_r, 1e-12);
  EXPECT_NEAR(*report.wer, mean_w, 1e-12);
  EXPECT_FALSE(report.bleu.has_value());
}

TEST(Evaluate, S2ttReportsBleuPerLanguage) {
  const auto c = tiny_encoder();
  const auto params = encoder::init_params<float>(c, 23);
  Rng rng(24);
  auto examples = random_examples(c, rng);
  for (auto& e : examples) e.query = e.candidate;
  const auto report = eval::evaluate_s2tt(params, c, examples);
  EXPECT_EQ(report.task, "s2tt");
  ASSERT_TRUE(report.bleu.has_value());
  EXPECT_FALSE(report.wer.has_value());
  for (const auto& l : report.languages) {
    ASSERT_TRUE(l.bleu.has_value());
    if (l.r_at_1 == 1.0) {
      EXPECT_EQ(*l.bleu, 100.0);
    }
  }
}

TEST(Report, JsonRoundTripAndTables) {
  eval::EvalReport r;
  r.task = "s2t";
  r.languages = {{"de", 10, 0.9, 0.1, std::nullopt}, {"fr", 20, 0.7, 0.3, std::nullopt}, {"zz", 5, 0.5, 0.5, std::nullopt}};
  r.r_at_1 = 0.7;
  r.wer = 0.3;
  r.provenance = {{"step", 12}};
  const auto back = eval::report_from_json(eval::to_json(r));
  EXPECT_EQ(back.task, "s2t");
  ASSERT_EQ(back.languages.size(), 3u);
  EXPECT_EQ(back.languages[1].count, 20u);
  EXPECT_EQ(*back.languages[2].wer, 0.5);
  EXPECT_EQ(back.provenance["step"], 12);

  const auto csv = eval::render_group_csv(r);
  std::istringstream lines(csv);
  std::string header;
  std::getline(lines, header);
  EXPECT_EQ(header, "family,languages,r_at_1,wer,bleu");
  std::map<std::string, std::string> rows;
  for (std::string line; std::getline(lines, line);) rows[line.substr(0, line.find(','))] = line;
  // de and fr share a family in the registry; their mean is unweighted.
  const auto& de_family = vocab::LanguageRegistry::fleurs().at("de").family;
  ASSERT_EQ(vocab::LanguageRegistry::fleurs().at("fr").family, de_family);
  ASSERT_TRUE(rows.count(de_family)) << csv;
  EXPECT_NE(rows[de_family].find("0.8000"), std::string::npos) << rows[de_family];
  ASSERT_TRUE(rows.count("Other")) << csv;

  const auto tsv = eval::render_language_tsv(r);
  EXPECT_NE(tsv.find("fr\tFrench\t"), std::string::npos) << tsv;
  EXPECT_NE(tsv.find("zz\t"), std::string::npos);

  const auto path = std::filesystem::temp_directory_path() / "dualspeech_report_test.json";
  eval::save_report(r, path);
  EXPECT_EQ(eval::load_report(path).languages.size(), 3u);
  std::filesystem::remove(path);
}
