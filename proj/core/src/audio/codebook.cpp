#include "dualspeech/audio/codebook.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <numeric>

#include "dualspeech/common/error.hpp"
#include "dualspeech/common/io.hpp"
#include "dualspeech/common/rng.hpp"

namespace dualspeech::audio {
namespace {

constexpr std::string_view kMagic = "DSCODEBK";

template <typename A, typename B>
double squared_distance(const A* a, const B* b, std::size_t dim) {
  double d = 0.0;
  for (std::size_t j = 0; j < dim; ++j) {
    const double diff = static_cast<double>(a[j]) - static_cast<double>(b[j]);
    d += diff * diff;
  }
  return d;
}

struct Assignment {
  std::vector<std::size_t> labels;
  std::vector<double> dist;
  double mean_distortion = 0.0;
};

Assignment assign(std::span<const float> frames, std::size_t dim, const std::vector<double>& centroids,
                  std::size_t k) {
  const std::size_t n = frames.size() / dim;
  Assignment out;
  out.labels.resize(n);
  out.dist.resize(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const float* x = frames.data() + i * dim;
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      const double d = squared_distance(x, centroids.data() + c * dim, dim);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    out.labels[i] = best;
    out.dist[i] = best_d;
    total += best_d;
  }
  out.mean_distortion = total / static_cast<double>(n);
  return out;
}

std::vector<double> kmeans_plus_plus(std::span<const float> frames, std::size_t dim, std::size_t k, Rng& rng) {
  const std::size_t n = frames.size() / dim;
  std::vector<double> centroids(k * dim);
  auto copy_point = [&](std::size_t c, std::size_t i) {
    for (std::size_t j = 0; j < dim; ++j) centroids[c * dim + j] = frames[i * dim + j];
  };
  copy_point(0, static_cast<std::size_t>(rng.below(n)));
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], squared_distance(frames.data() + i * dim, centroids.data() + (c - 1) * dim, dim));
      total += nearest[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += nearest[i];
        if (acc > target && nearest[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<std::size_t>(rng.below(n));
    }
    copy_point(c, pick);
  }
  return centroids;
}

}  // namespace

KMeansResult fit_codebook(std::span<const float> frames, std::size_t dim, const KMeansOptions& options) {
  const std::size_t k = options.k;
  if (dim == 0 || frames.size() % dim != 0) {
    fail(ErrorKind::kCodebook, "fit_codebook: frame buffer is not a whole number of " + std::to_string(dim) + "-dim frames");
  }
  if (k < 2) fail(ErrorKind::kConfig, "fit_codebook: k must be >= 2");
  if (options.max_iters < 1) fail(ErrorKind::kConfig, "fit_codebook: max_iters must be >= 1");
  const std::size_t n = frames.size() / dim;
  if (n < k) {
    fail(ErrorKind::kInsufficientData,
         "fit_codebook: " + std::to_string(n) + " frames is fewer than k=" + std::to_string(k));
  }
  for (float v : frames) {
    if (!std::isfinite(v)) fail(ErrorKind::kNumeric, "fit_codebook: non-finite frame value");
  }

  Rng rng(options.seed);
  std::vector<double> centroids = kmeans_plus_plus(frames, dim, k, rng);

  KMeansResult result;
  Assignment current = assign(frames, dim, centroids, k);
  result.distortion_history.push_back(current.mean_distortion);

  std::vector<double> sums(k * dim);
  std::vector<std::size_t> counts(k);
  for (std::size_t iter = 0; iter < options.max_iters; ++iter) {
    // Update step: fixed-order accumulation keeps the fit deterministic.
    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = current.labels[i];
      ++counts[c];
      for (std::size_t j = 0; j < dim; ++j) sums[c * dim + j] += frames[i * dim + j];
    }
    std::vector<std::size_t> far_order;
    std::size_t far_next = 0;
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        for (std::size_t j = 0; j < dim; ++j) centroids[c * dim + j] = sums[c * dim + j] / static_cast<double>(counts[c]);
        continue;
      }
      // Empty cluster: move it onto the frame currently farthest from its centroid.
      if (far_order.empty()) {
        far_order.resize(n);
        std::iota(far_order.begin(), far_order.end(), std::size_t{0});
        std::stable_sort(far_order.begin(), far_order.end(),
                         [&](std::size_t a, std::size_t b) { return current.dist[a] > current.dist[b]; });
      }
      const std::size_t i = far_order[std::min(far_next++, n - 1)];
      for (std::size_t j = 0; j < dim; ++j) centroids[c * dim + j] = frames[i * dim + j];
      ++result.repairs;
    }

    Assignment next = assign(frames, dim, centroids, k);
    result.distortion_history.push_back(next.mean_distortion);
    ++result.iterations;
    const bool unchanged = next.labels == current.labels;
    current = std::move(next);
    if (unchanged) {
      result.converged = true;
      break;
    }
  }

  // Canonical order: lexicographic by coordinates.
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(centroids.begin() + static_cast<std::ptrdiff_t>(a * dim),
                                        centroids.begin() + static_cast<std::ptrdiff_t>((a + 1) * dim),
                                        centroids.begin() + static_cast<std::ptrdiff_t>(b * dim),
                                        centroids.begin() + static_cast<std::ptrdiff_t>((b + 1) * dim));
  });

  Codebook& cb = result.codebook;
  cb.k = k;
  cb.dim = dim;
  cb.frame_rate_hz = options.frame_rate_hz;
  cb.seed = options.seed;
  cb.centroids.resize(k * dim);
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t j = 0; j < dim; ++j) cb.centroids[c * dim + j] = static_cast<float>(centroids[order[c] * dim + j]);
  }
  for (std::size_t c = 1; c < k; ++c) {
    if (std::equal(cb.centroids.begin() + static_cast<std::ptrdiff_t>((c - 1) * dim),
                   cb.centroids.begin() + static_cast<std::ptrdiff_t>(c * dim),
                   cb.centroids.begin() + static_cast<std::ptrdiff_t>(c * dim))) {
      result.collapsed.emplace_back(c - 1, c);
    }
  }
  if (!result.collapsed.empty()) {
    spdlog::warn("fit_codebook: {} centroid pair(s) collapsed; data has fewer distinct frames than k={}",
                 result.collapsed.size(), k);
  }
  return result;
}

std::vector<int> quantize(std::span<const float> frames, std::size_t dim, const Codebook& codebook) {
  if (dim != codebook.dim) {
    fail(ErrorKind::kCodebook, "quantize: frame dim " + std::to_string(dim) + " does not match codebook dim " +
                                   std::to_string(codebook.dim));
  }
  if (dim == 0 || frames.size() % dim != 0) fail(ErrorKind::kCodebook, "quantize: ragged frame buffer");
  const std::size_t n = frames.size() / dim;
  std::vector<int> tokens(n);
  for (std::size_t i = 0; i < n; ++i) {
    const float* x = frames.data() + i * dim;
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < codebook.k; ++c) {
      const double d = squared_distance(x, codebook.centroids.data() + c * dim, dim);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    tokens[i] = static_cast<int>(best);
  }
  return tokens;
}

std::vector<int> quantize(const FrameSequence& sequence, const Codebook& codebook) {
  return quantize(sequence.frames, sequence.dim, codebook);
}

double distortion(std::span<const float> frames, std::size_t dim, const Codebook& codebook) {
  const auto tokens = quantize(frames, dim, codebook);
  if (tokens.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    total += squared_distance(frames.data() + i * dim,
                              codebook.centroids.data() + static_cast<std::size_t>(tokens[i]) * dim, dim);
  }
  return total / static_cast<double>(tokens.size());
}

std::string encode_codebook(const Codebook& codebook) {
  nlohmann::json header = {{"k", codebook.k},
                           {"dim", codebook.dim},
                           {"frame_rate_hz", codebook.frame_rate_hz},
                           {"seed", codebook.seed}};
  const std::string text = header.dump();
  std::string out(kMagic);
  io::put_u32(out, static_cast<std::uint32_t>(text.size()));
  out += text;
  io::put_f32s(out, codebook.centroids);
  return out;
}

Codebook decode_codebook(std::string_view bytes) {
  io::ByteReader reader(bytes, "codebook");
  if (reader.take(kMagic.size()) != kMagic) fail(ErrorKind::kIntegrity, "codebook: bad magic");
  const std::uint32_t header_len = reader.u32();
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(reader.take(header_len));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kIntegrity, std::string("codebook: malformed header: ") + e.what());
  }
  Codebook cb;
  try {
    cb.k = header.at("k").get<std::size_t>();
    cb.dim = header.at("dim").get<std::size_t>();
    cb.frame_rate_hz = header.at("frame_rate_hz").get<double>();
    cb.seed = header.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kIntegrity, std::string("codebook: header field: ") + e.what());
  }
  if (cb.k < 2 || cb.dim == 0) fail(ErrorKind::kIntegrity, "codebook: header declares k < 2 or dim 0");
  if (reader.remaining() != cb.k * cb.dim * 4) {
    fail(ErrorKind::kIntegrity, "codebook: centroid block is " + std::to_string(reader.remaining()) +
                                    " bytes, header implies " + std::to_string(cb.k * cb.dim * 4));
  }
  cb.centroids.resize(cb.k * cb.dim);
  reader.f32s(cb.centroids);
  for (float v : cb.centroids) {
    if (!std::isfinite(v)) fail(ErrorKind::kIntegrity, "codebook: non-finite centroid value");
  }
  return cb;
}

void save_codebook(const Codebook& codebook, const std::filesystem::path& path) {
  io::write_file_atomic(path, encode_codebook(codebook));
}

Codebook load_codebook(const std::filesystem::path& path) { return decode_codebook(io::read_file(path)); }

}  // namespace dualspeech::audio
