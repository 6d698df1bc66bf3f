#include "dualspeech/eval/retrieval.hpp"

#include <algorithm>
#include <numeric>

#include "dualspeech/common/error.hpp"

namespace dualspeech::eval {

void RetrievalIndex::add(std::span<const float> embedding, std::string text, std::string language) {
  if (embedding.size() != dim_) {
    fail(ErrorKind::kDimension, "retrieval index: embedding has " + std::to_string(embedding.size()) +
                                    " values, index dim is " + std::to_string(dim_));
  }
  embeddings_.insert(embeddings_.end(), embedding.begin(), embedding.end());
  texts_.push_back(std::move(text));
  languages_.push_back(std::move(language));
}

std::vector<double> RetrievalIndex::scores(std::span<const float> query) const {
  if (query.size() != dim_) {
    fail(ErrorKind::kDimension, "retrieval: query has " + std::to_string(query.size()) + " values, index dim is " +
                                    std::to_string(dim_));
  }
  std::vector<double> out(size());
  for (std::size_t i = 0; i < size(); ++i) {
    const float* row = embeddings_.data() + i * dim_;
    double acc = 0.0;
    for (std::size_t d = 0; d < dim_; ++d) acc += static_cast<double>(row[d]) * static_cast<double>(query[d]);
    out[i] = acc;
  }
  return out;
}

std::vector<std::size_t> retrieve_top_k(std::span<const float> query, const RetrievalIndex& index, std::size_t k) {
  if (index.size() == 0) fail(ErrorKind::kContract, "retrieve_top_k: empty index");
  if (k < 1 || k > index.size()) {
    fail(ErrorKind::kContract, "retrieve_top_k: k=" + std::to_string(k) + " outside [1, " +
                                   std::to_string(index.size()) + "]");
  }
  const std::vector<double> s = index.scores(query);
  std::vector<std::size_t> order(s.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) { return s[a] > s[b] || (s[a] == s[b] && a < b); });
  order.resize(k);
  return order;
}

double recall_at_1(std::span<const std::vector<float>> queries, std::span<const std::size_t> gold,
                   const RetrievalIndex& index) {
  if (queries.size() != gold.size()) fail(ErrorKind::kContract, "recall_at_1: query and gold counts differ");
  if (queries.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    if (gold[i] >= index.size()) fail(ErrorKind::kContract, "recall_at_1: gold id out of range");
    hits += retrieve_top_k(queries[i], index, 1).front() == gold[i];
  }
  return static_cast<double>(hits) / static_cast<double>(queries.size());
}

}  // namespace dualspeech::eval
