#include "dualspeech/corpus/frame_file.hpp"

#include "dualspeech/common/error.hpp"
#include "dualspeech/common/io.hpp"

namespace dualspeech::corpus {

namespace {
constexpr std::string_view kMagic = "DSPFRM01";
}

std::string encode_frame_file(const FrameFile& file) {
  if (file.dim == 0) fail(ErrorKind::kDimension, "frame file: dim must be positive");
  if (file.frames.size() % file.dim != 0) fail(ErrorKind::kDimension, "frame file: ragged frame buffer");
  std::string out(kMagic);
  io::put_u32(out, static_cast<std::uint32_t>(file.dim));
  io::put_u32(out, static_cast<std::uint32_t>(file.count()));
  io::put_f32(out, file.frame_rate_hz);
  io::put_f32s(out, file.frames);
  return out;
}

FrameFile decode_frame_file(std::string_view bytes, const std::string& what) {
  if (bytes.size() < kFrameHeaderBytes) {
    fail(ErrorKind::kIntegrity, what + ": " + std::to_string(bytes.size()) + " bytes is shorter than the header");
  }
  io::ByteReader reader(bytes, what);
  if (reader.take(kMagic.size()) != kMagic) fail(ErrorKind::kIntegrity, what + ": bad magic");
  FrameFile file;
  file.dim = reader.u32();
  const std::size_t count = reader.u32();
  file.frame_rate_hz = reader.f32();
  if (file.dim == 0) fail(ErrorKind::kIntegrity, what + ": dim is zero");
  const std::uint64_t expected = kFrameHeaderBytes + static_cast<std::uint64_t>(count) * file.dim * 4;
  if (bytes.size() != expected) {
    fail(ErrorKind::kIntegrity, what + ": expected " + std::to_string(expected) + " bytes, found " +
                                    std::to_string(bytes.size()));
  }
  file.frames.resize(count * file.dim);
  reader.f32s(file.frames);
  return file;
}

void write_frame_file(const std::filesystem::path& path, const FrameFile& file) {
  io::write_file_atomic(path, encode_frame_file(file));
}

FrameFile read_frame_file(const std::filesystem::path& path) {
  return decode_frame_file(io::read_file(path), path.string());
}

}  // namespace dualspeech::corpus
