#include "dualspeech/corpus/dataset.hpp"

#include "dualspeech/common/error.hpp"
#include "dualspeech/corpus/frame_file.hpp"

namespace dualspeech::corpus {

FrameLoader file_frame_loader(std::filesystem::path base_dir) {
  return [base = std::move(base_dir)](const ManifestRecord& r) {
    if (!r.frames_path) fail(ErrorKind::kData, "record '" + r.id + "' has no frames_path");
    std::filesystem::path path(*r.frames_path);
    if (path.is_relative()) path = base / path;
    FrameFile file;
    try {
      file = read_frame_file(path);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::kIo) fail(ErrorKind::kData, "record '" + r.id + "': " + e.what());
      throw;
    }
    audio::FrameSequence seq;
    seq.dim = file.dim;
    seq.frames = std::move(file.frames);
    seq.source_id = r.id;
    seq.language = r.language;
    return seq;
  };
}

vocab::TokenSequence speech_input(const ManifestRecord& r, const FrameLoader& frames, const InputContext& ctx) {
  const audio::FrameSequence seq = frames(r);
  if (seq.length() == 0) fail(ErrorKind::kData, "record '" + r.id + "' has no frames");
  if (ctx.codebook.k != ctx.vocab.a()) {
    fail(ErrorKind::kConfig, "codebook has " + std::to_string(ctx.codebook.k) + " centroids but the vocabulary has " +
                                 std::to_string(ctx.vocab.a()) + " audio tokens");
  }
  const std::vector<int> tokens = audio::quantize(seq, ctx.codebook);
  return vocab::build_speech_input(r.language, tokens, ctx.vocab, ctx.max_length, ctx.registry);
}

std::vector<train::TrainingPair> s2t_pairs(const std::vector<ManifestRecord>& records, const FrameLoader& frames,
                                           const InputContext& ctx) {
  std::vector<train::TrainingPair> out;
  for (const auto& r : records) {
    if (r.task != RecordTask::kS2T) continue;
    out.push_back({speech_input(r, frames, ctx),
                   vocab::build_text_input(r.language, *r.transcript, ctx.vocab, ctx.max_length, ctx.registry),
                   train::Task::kS2T});
  }
  return out;
}

std::vector<train::TrainingPair> mt_pairs(const std::vector<ManifestRecord>& records, const InputContext& ctx) {
  std::vector<train::TrainingPair> out;
  for (const auto& r : records) {
    if (r.task != RecordTask::kMT) continue;
    out.push_back({vocab::build_text_input(r.language, *r.transcript, ctx.vocab, ctx.max_length, ctx.registry),
                   vocab::build_text_input(r.translation->target_lang, r.translation->text, ctx.vocab, ctx.max_length,
                                           ctx.registry),
                   train::Task::kMT});
  }
  return out;
}

std::vector<eval::RetrievalExample> s2t_examples(const std::vector<ManifestRecord>& records,
                                                 const FrameLoader& frames, const InputContext& ctx) {
  std::vector<eval::RetrievalExample> out;
  for (const auto& r : records) {
    if (r.task != RecordTask::kS2T) continue;
    out.push_back({r.id, r.language, speech_input(r, frames, ctx),
                   vocab::build_text_input(r.language, *r.transcript, ctx.vocab, ctx.max_length, ctx.registry),
                   *r.transcript});
  }
  return out;
}

std::vector<eval::RetrievalExample> s2tt_examples(const std::vector<ManifestRecord>& records,
                                                  const FrameLoader& frames, const InputContext& ctx) {
  std::vector<eval::RetrievalExample> out;
  for (const auto& r : records) {
    if (r.task != RecordTask::kS2TT) continue;
    out.push_back({r.id, r.language, speech_input(r, frames, ctx),
                   vocab::build_text_input(r.translation->target_lang, r.translation->text, ctx.vocab,
                                           ctx.max_length, ctx.registry),
                   r.translation->text});
  }
  return out;
}

std::vector<std::string> collect_texts(const std::vector<ManifestRecord>& records, bool with_prefix_labels,
                                       const vocab::LanguageRegistry& registry) {
  std::vector<std::string> out;
  auto label = [&](const std::string& lang, vocab::Modality m) {
    if (with_prefix_labels) out.push_back(registry.at(lang).name + " " + std::string(vocab::modality_name(m)));
  };
  for (const auto& r : records) {
    if (r.frames_path) label(r.language, vocab::Modality::kSpeech);
    if (r.transcript) {
      out.push_back(*r.transcript);
      label(r.language, vocab::Modality::kText);
    }
    if (r.translation) {
      out.push_back(r.translation->text);
      label(r.translation->target_lang, vocab::Modality::kText);
    }
  }
  return out;
}

std::vector<float> collect_frames(const std::vector<ManifestRecord>& records, const FrameLoader& frames,
                                  std::size_t& dim) {
  std::vector<float> out;
  dim = 0;
  for (const auto& r : records) {
    if (!r.frames_path) continue;
    const audio::FrameSequence seq = frames(r);
    if (dim == 0) dim = seq.dim;
    if (seq.dim != dim) {
      fail(ErrorKind::kDimension, "record '" + r.id + "' has frame dim " + std::to_string(seq.dim) + ", expected " +
                                      std::to_string(dim));
    }
    out.insert(out.end(), seq.frames.begin(), seq.frames.end());
  }
  return out;
}

}  // namespace dualspeech::corpus
