#pragma once

#include <span>
#include <string>
#include <vector>

namespace dualspeech::eval {

/// Flat candidate store: row i of `embeddings` belongs to texts[i].
class RetrievalIndex {
 public:
  explicit RetrievalIndex(std::size_t dim) : dim_(dim) {}

  void add(std::span<const float> embedding, std::string text, std::string language = {});

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return texts_.size(); }
  std::span<const float> embedding(std::size_t i) const { return {embeddings_.data() + i * dim_, dim_}; }
  const std::string& text(std::size_t i) const { return texts_[i]; }
  const std::string& language(std::size_t i) const { return languages_[i]; }

  /// Dot products (accumulated in double) against every candidate.
  std::vector<double> scores(std::span<const float> query) const;

 private:
  std::size_t dim_;
  std::vector<float> embeddings_;
  std::vector<std::string> texts_;
  std::vector<std::string> languages_;
};

/// The k best candidates by descending dot product; equal scores keep
/// ascending candidate order.
std::vector<std::size_t> retrieve_top_k(std::span<const float> query, const RetrievalIndex& index, std::size_t k);

/// Fraction of queries whose top-1 candidate equals gold[i].
double recall_at_1(std::span<const std::vector<float>> queries, std::span<const std::size_t> gold,
                   const RetrievalIndex& index);

}  // namespace dualspeech::eval
