#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dualspeech::audio {

/// Speech feature frames for one utterance, row-major L x dim.
struct FrameSequence {
  std::vector<float> frames;
  std::size_t dim = 0;
  std::string source_id;
  std::string language;

  std::size_t length() const { return dim == 0 ? 0 : frames.size() / dim; }
  std::span<const float> frame(std::size_t i) const { return {frames.data() + i * dim, dim}; }
};

/// k centroids defining the audio token vocabulary. frame_rate_hz is
/// metadata describing the quantized stream; nothing is resampled.
struct Codebook {
  std::size_t k = 0;
  std::size_t dim = 0;
  double frame_rate_hz = 25.0;
  std::uint64_t seed = 0;
  std::vector<float> centroids;

  std::span<const float> centroid(std::size_t i) const { return {centroids.data() + i * dim, dim}; }
};

struct KMeansOptions {
  std::size_t k = 512;
  std::size_t max_iters = 50;
  std::uint64_t seed = 0;
  double frame_rate_hz = 25.0;
};

struct KMeansResult {
  Codebook codebook;
  /// Mean squared distance after every assignment step, starting with the
  /// assignment to the k-means++ seeds.
  std::vector<double> distortion_history;
  std::size_t iterations = 0;
  bool converged = false;
  /// Number of empty clusters re-seeded to the farthest frame.
  std::size_t repairs = 0;
  /// Pairs of centroid indices (in the returned codebook) that remain
  /// identical because the data has fewer distinct points than k.
  std::vector<std::pair<std::size_t, std::size_t>> collapsed;
};

/// Lloyd's algorithm from k-means++ seeds. Centroids are returned sorted
/// lexicographically so token ids do not depend on seeding order.
KMeansResult fit_codebook(std::span<const float> frames, std::size_t dim, const KMeansOptions& options);

/// Nearest centroid by squared Euclidean distance; ties go to the lowest index.
std::vector<int> quantize(std::span<const float> frames, std::size_t dim, const Codebook& codebook);
std::vector<int> quantize(const FrameSequence& sequence, const Codebook& codebook);

/// Mean squared distance from each frame to its nearest centroid.
double distortion(std::span<const float> frames, std::size_t dim, const Codebook& codebook);

std::string encode_codebook(const Codebook& codebook);
Codebook decode_codebook(std::string_view bytes);
void save_codebook(const Codebook& codebook, const std::filesystem::path& path);
Codebook load_codebook(const std::filesystem::path& path);

}  // namespace dualspeech::audio
