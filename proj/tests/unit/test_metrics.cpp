#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <map>
#include <nlohmann/json.hpp>
#include <numeric>

#include "dualspeech/common/error.hpp"
#include "dualspeech/common/io.hpp"
#include "dualspeech/common/rng.hpp"
#include "dualspeech/eval/metrics.hpp"
#include "dualspeech/eval/retrieval.hpp"

using namespace dualspeech;
using nlohmann::json;

namespace {

// Plain recursion over suffixes with memoization; no shared rows.
std::size_t oracle_edit_distance(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
  std::function<std::size_t(std::size_t, std::size_t)> d = [&](std::size_t i, std::size_t j) -> std::size_t {
    if (i == a.size()) return b.size() - j;
    if (j == b.size()) return a.size() - i;
    const auto key = std::make_pair(i, j);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    const std::size_t best = std::min({d(i + 1, j) + 1, d(i, j + 1) + 1, d(i + 1, j + 1) + (a[i] == b[j] ? 0 : 1)});
    memo[key] = best;
    return best;
  };
  return d(0, 0);
}

std::vector<std::string> random_words(Rng& rng, std::size_t max_len) {
  static const char* kWords[] = {"a", "b", "c", "d", "e"};
  std::vector<std::string> out(rng.below(max_len + 1));
  for (auto& w : out) w = kWords[rng.below(5)];
  return out;
}

std::string join(const std::vector<std::string>& words) {
  std::string s;
  for (const auto& w : words) s += (s.empty() ? "" : " ") + w;
  return s;
}

json load_fixture() { return json::parse(io::read_file(std::string(DUALSPEECH_FIXTURE_DIR) + "/bleu_oracle.json")); }

}  // namespace

TEST(Wer, SplitsOnWhitespaceRuns) {
  EXPECT_EQ(eval::split_words("  a\tb \n c  "), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_TRUE(eval::split_words("   ").empty());
}

TEST(Wer, KnownValues) {
  EXPECT_DOUBLE_EQ(eval::wer("a b c d", "a b c d"), 0.0);
  EXPECT_DOUBLE_EQ(eval::wer("a b c d", "a x c d"), 0.25);
  EXPECT_DOUBLE_EQ(eval::wer("a b", "x y z w"), 2.0);
  EXPECT_DOUBLE_EQ(eval::wer("a b c", ""), 1.0);
  EXPECT_THROW(eval::wer("", "a"), Error);
}

TEST(Wer, MatchesRecursiveOracleOnRandomInstances) {
  Rng rng(31);
  for (int trial = 0; trial < 1000; ++trial) {
    auto ref = random_words(rng, 9);
    if (ref.empty()) ref.push_back("a");
    const auto hyp = random_words(rng, 9);
    const auto expect = oracle_edit_distance(ref, hyp);
    EXPECT_EQ(eval::levenshtein(ref, hyp), expect);
    EXPECT_DOUBLE_EQ(eval::wer(ref, hyp), static_cast<double>(expect) / static_cast<double>(ref.size()));
    EXPECT_DOUBLE_EQ(eval::wer(join(ref), join(hyp)), eval::wer(ref, hyp));
  }
}

TEST(Wer, AccumulatorIsCorpusLevel) {
  eval::WerAccumulator acc;
  acc.add("a b c d", "a b c d");
  acc.add("a b", "x y");
  EXPECT_EQ(acc.edits(), 2u);
  EXPECT_EQ(acc.reference_words(), 6u);
  EXPECT_DOUBLE_EQ(acc.value(), 2.0 / 6.0);
}

TEST(Retrieval, TopKMatchesStableArgsortOracle) {
  Rng rng(32);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t dim = 1 + rng.below(4), n = 1 + rng.below(20);
    eval::RetrievalIndex index(dim);
    std::vector<std::vector<float>> cands(n, std::vector<float>(dim));
    for (auto& c : cands) {
      // Small integers make exact ties common.
      for (auto& v : c) v = static_cast<float>(static_cast<int>(rng.below(5)) - 2);
      index.add(c, "c");
    }
    std::vector<float> q(dim);
    for (auto& v : q) v = static_cast<float>(static_cast<int>(rng.below(5)) - 2);
    std::vector<long> score(n);
    for (std::size_t i = 0; i < n; ++i) {
      long s = 0;
      for (std::size_t k = 0; k < dim; ++k) s += static_cast<long>(q[k]) * static_cast<long>(cands[i][k]);
      score[i] = s;
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
    const std::size_t k = 1 + rng.below(n);
    const auto got = eval::retrieve_top_k(q, index, k);
    EXPECT_EQ(got, std::vector<std::size_t>(order.begin(), order.begin() + static_cast<long>(k)));
  }
}

TEST(Retrieval, ContractsAndRecall) {
  eval::RetrievalIndex empty(2);
  const std::vector<float> q{1, 0};
  EXPECT_THROW(eval::retrieve_top_k(q, empty, 1), Error);
  eval::RetrievalIndex index(2);
  index.add(std::vector<float>{1, 0}, "x");
  index.add(std::vector<float>{0, 1}, "y");
  EXPECT_THROW(eval::retrieve_top_k(q, index, 0), Error);
  EXPECT_THROW(eval::retrieve_top_k(q, index, 3), Error);
  EXPECT_THROW(eval::retrieve_top_k(std::vector<float>{1, 0, 0}, index, 1), Error);
  EXPECT_THROW(index.add(std::vector<float>{1}, "bad"), Error);
  const std::vector<std::vector<float>> queries{{2, 1}, {1, 3}, {1, 2}};
  const std::vector<std::size_t> gold{0, 1, 0};
  EXPECT_DOUBLE_EQ(eval::recall_at_1(queries, gold, index), 2.0 / 3.0);
}

TEST(Bleu, Tokenize13aMatchesRecordedOracle) {
  const auto fx = load_fixture();
  for (const auto& c : fx["tokenize"]) {
    EXPECT_EQ(eval::tokenize_13a(c["line"].get<std::string>()), c["tokens"].get<std::vector<std::string>>())
        << c["line"];
  }
}

TEST(Bleu, CorpusScoreMatchesRecordedOracle) {
  const auto fx = load_fixture();
  for (const auto& c : fx["cases"]) {
    const auto hyps = c["hyps"].get<std::vector<std::string>>();
    const auto refs = c["refs"].get<std::vector<std::string>>();
    eval::BleuStats stats;
    for (std::size_t i = 0; i < hyps.size(); ++i) {
      stats.add(eval::tokenize_13a(hyps[i]), eval::tokenize_13a(refs[i]));
    }
    for (std::size_t n = 0; n < 4; ++n) {
      EXPECT_EQ(stats.matches[n], c["counts"][n].get<std::size_t>()) << c["name"] << " order " << n + 1;
      EXPECT_EQ(stats.totals[n], c["totals"][n].get<std::size_t>()) << c["name"] << " order " << n + 1;
    }
    EXPECT_EQ(stats.hyp_len, c["sys_len"].get<std::size_t>());
    EXPECT_EQ(stats.ref_len, c["ref_len"].get<std::size_t>());
    const double expect = c["bleu"].get<double>();
    EXPECT_NEAR(eval::corpus_bleu(hyps, refs), expect, 5e-5) << c["name"];
  }
}

TEST(Bleu, IdentityIsHundredAndDisjointIsZero) {
  const std::vector<std::string> h{"the quick brown fox jumps", "over the lazy dog ."};
  EXPECT_EQ(eval::corpus_bleu(h, h), 100.0);
  const std::vector<std::string> z{"alpha beta gamma delta", "epsilon zeta eta theta"};
  EXPECT_EQ(eval::corpus_bleu(z, h), 0.0);
  EXPECT_THROW(eval::corpus_bleu(h, std::vector<std::string>{"x"}), Error);
}
