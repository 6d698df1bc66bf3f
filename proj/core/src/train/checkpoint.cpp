#include "dualspeech/train/checkpoint.hpp"

#include <nlohmann/json.hpp>

#include "dualspeech/common/error.hpp"
#include "dualspeech/common/io.hpp"

namespace dualspeech::train {

using nlohmann::json;
using num::Tensor;

namespace {

constexpr std::string_view kMagic = "DSCKPT01";
constexpr std::string_view kFormat = "dualspeech-checkpoint-v1";

struct ArrayRef {
  std::string name;
  num::Shape shape;
  std::span<const float> values;
};

std::vector<ArrayRef> collect_arrays(const Checkpoint& c) {
  std::vector<ArrayRef> out;
  c.params.for_each(
      [&](const std::string& name, const Tensor<float>& t) { out.push_back({"param/" + name, t.shape, t.data}); });
  std::size_t i = 0;
  c.params.for_each([&](const std::string& name, const Tensor<float>& t) {
    out.push_back({"adam_m/" + name, t.shape, c.optimizer.m.at(i)});
    out.push_back({"adam_v/" + name, t.shape, c.optimizer.v.at(i)});
    ++i;
  });
  if (c.codebook) {
    out.push_back({"codebook/centroids", {c.codebook->k, c.codebook->dim}, c.codebook->centroids});
  }
  return out;
}

[[noreturn]] void corrupt(const std::string& msg) { fail(ErrorKind::kIntegrity, "checkpoint: " + msg); }

}  // namespace

std::string encode_checkpoint(const Checkpoint& c) {
  if (c.optimizer.m.size() != c.optimizer.v.size()) fail(ErrorKind::kContract, "checkpoint: optimizer state ragged");
  std::string payload;
  json arrays = json::array();
  std::size_t offset = 0;
  for (const ArrayRef& a : collect_arrays(c)) {
    if (num::shape_product(a.shape) != a.values.size()) {
      fail(ErrorKind::kDimension, "checkpoint: array " + a.name + " does not match its shape");
    }
    io::put_f32s(payload, a.values);
    arrays.push_back({{"name", a.name}, {"shape", a.shape}, {"offset", offset}, {"count", a.values.size()}});
    offset += a.values.size();
  }
  json manifest = {{"format", kFormat},
                   {"encoder", encoder::to_json(c.encoder)},
                   {"train", to_json(c.train)},
                   {"config_hash", io::hex64(encoder::config_hash(c.encoder))},
                   {"step", c.step},
                   {"seed", c.train.seed},
                   {"optimizer",
                    {{"step", c.optimizer.step},
                     {"beta1", c.optimizer.hyper.beta1},
                     {"beta2", c.optimizer.hyper.beta2},
                     {"eps", c.optimizer.hyper.eps}}},
                   {"vocab", c.vocab ? vocab::vocab_to_json(*c.vocab) : json(nullptr)},
                   {"codebook", c.codebook ? json{{"k", c.codebook->k},
                                                  {"dim", c.codebook->dim},
                                                  {"frame_rate_hz", c.codebook->frame_rate_hz},
                                                  {"seed", c.codebook->seed}}
                                           : json(nullptr)},
                   {"arrays", std::move(arrays)},
                   {"payload_fnv1a64", io::hex64(io::fnv1a64(payload))}};
  const std::string text = manifest.dump();
  std::string out(kMagic);
  io::put_u64(out, text.size());
  out += text;
  out += payload;
  return out;
}

Checkpoint decode_checkpoint(std::string_view bytes) {
  io::ByteReader reader(bytes, "checkpoint");
  if (reader.take(kMagic.size()) != kMagic) corrupt("bad magic");
  const std::uint64_t manifest_len = reader.u64();
  if (manifest_len > reader.remaining()) corrupt("manifest length exceeds file size");
  const std::string_view manifest_text = reader.take(manifest_len);
  const std::string_view payload = bytes.substr(reader.offset());

  json m;
  try {
    m = json::parse(manifest_text);
  } catch (const json::exception& e) {
    corrupt(std::string("manifest is not valid JSON: ") + e.what());
  }

  Checkpoint c;
  try {
    if (m.at("format").get<std::string>() != kFormat) corrupt("unknown format");
    if (payload.size() % 4 != 0) corrupt("payload is not a whole number of floats");
    if (m.at("payload_fnv1a64").get<std::string>() != io::hex64(io::fnv1a64(payload))) {
      corrupt("payload hash mismatch");
    }
    c.encoder = encoder::encoder_config_from_json(m.at("encoder"));
    if (m.at("config_hash").get<std::string>() != io::hex64(encoder::config_hash(c.encoder))) {
      corrupt("config hash does not match stored encoder config");
    }
    c.train = train_config_from_json(m.at("train"));
    c.step = m.at("step").get<std::size_t>();
    const json& opt = m.at("optimizer");
    c.optimizer.step = opt.at("step").get<std::uint64_t>();
    c.optimizer.hyper = {opt.at("beta1").get<double>(), opt.at("beta2").get<double>(), opt.at("eps").get<double>()};
    if (!m.at("vocab").is_null()) c.vocab = vocab::vocab_from_json(m.at("vocab"));
    if (!m.at("codebook").is_null()) {
      const json& cb = m.at("codebook");
      audio::Codebook book;
      book.k = cb.at("k").get<std::size_t>();
      book.dim = cb.at("dim").get<std::size_t>();
      book.frame_rate_hz = cb.at("frame_rate_hz").get<double>();
      book.seed = cb.at("seed").get<std::uint64_t>();
      book.centroids.resize(book.k * book.dim);
      c.codebook = std::move(book);
    }
    c.params = encoder::allocate_params<float>(c.encoder);
    c.optimizer.m.clear();
    c.optimizer.v.clear();
    c.params.for_each([&](const std::string&, const Tensor<float>& t) {
      c.optimizer.m.emplace_back(t.size());
      c.optimizer.v.emplace_back(t.size());
    });

    // Destination spans in the same order as encode_checkpoint writes them.
    std::vector<std::pair<std::string, std::span<float>>> targets;
    std::vector<num::Shape> shapes;
    c.params.for_each([&](const std::string& name, Tensor<float>& t) {
      targets.emplace_back("param/" + name, t.data);
      shapes.push_back(t.shape);
    });
    std::size_t i = 0;
    c.params.for_each([&](const std::string& name, Tensor<float>& t) {
      targets.emplace_back("adam_m/" + name, c.optimizer.m[i]);
      shapes.push_back(t.shape);
      targets.emplace_back("adam_v/" + name, c.optimizer.v[i]);
      shapes.push_back(t.shape);
      ++i;
    });
    if (c.codebook) {
      targets.emplace_back("codebook/centroids", c.codebook->centroids);
      shapes.push_back({c.codebook->k, c.codebook->dim});
    }

    const json& arrays = m.at("arrays");
    if (arrays.size() != targets.size()) corrupt("array count does not match the configuration");
    std::size_t expected_offset = 0;
    for (std::size_t a = 0; a < targets.size(); ++a) {
      const json& entry = arrays[a];
      const auto& [name, dst] = targets[a];
      if (entry.at("name").get<std::string>() != name) corrupt("expected array " + name);
      if (entry.at("shape").get<num::Shape>() != shapes[a]) corrupt("shape mismatch for " + name);
      const auto offset = entry.at("offset").get<std::size_t>();
      const auto count = entry.at("count").get<std::size_t>();
      if (offset != expected_offset || count != dst.size()) corrupt("bad extent for " + name);
      expected_offset += count;
    }
    if (expected_offset * 4 != payload.size()) corrupt("payload length does not match the manifest");
    io::ByteReader data(payload, "checkpoint payload");
    for (auto& [name, dst] : targets) data.f32s(dst);
  } catch (const json::exception& e) {
    corrupt(std::string("malformed manifest: ") + e.what());
  }
  return c;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  io::write_file_atomic(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(io::read_file(path)); }

Checkpoint load_checkpoint(const std::filesystem::path& path, const encoder::EncoderConfig& expected) {
  Checkpoint c = load_checkpoint(path);
  if (encoder::config_hash(c.encoder) != encoder::config_hash(expected)) {
    fail(ErrorKind::kConfig, "checkpoint " + path.string() + " was written for a different encoder config");
  }
  return c;
}

}  // namespace dualspeech::train
