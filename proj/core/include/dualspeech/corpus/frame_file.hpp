#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace dualspeech::corpus {

/// Speech feature frames on disk:
///   offset 0   "DSPFRM01"
///   offset 8   u32 dim
///   offset 12  u32 count (frames)
///   offset 16  f32 frame_rate_hz
///   offset 20  count * dim f32, row-major
/// All integers and floats little-endian.
struct FrameFile {
  std::size_t dim = 0;
  float frame_rate_hz = 25.0f;
  std::vector<float> frames;

  std::size_t count() const { return dim == 0 ? 0 : frames.size() / dim; }
};

inline constexpr std::size_t kFrameHeaderBytes = 20;

std::string encode_frame_file(const FrameFile& file);
/// Rejects a wrong magic and any byte length other than header + count*dim*4.
FrameFile decode_frame_file(std::string_view bytes, const std::string& what = "frame file");

void write_frame_file(const std::filesystem::path& path, const FrameFile& file);
FrameFile read_frame_file(const std::filesystem::path& path);

}  // namespace dualspeech::corpus
