#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <set>

#include "dualspeech/common/error.hpp"
#include "dualspeech/common/io.hpp"
#include "dualspeech/config.hpp"
#include "dualspeech/corpus/dataset.hpp"
#include "dualspeech/corpus/frame_file.hpp"
#include "dualspeech/corpus/manifest.hpp"
#include "dualspeech/corpus/synthetic.hpp"

using namespace dualspeech;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

corpus::SyntheticSpec small_spec() {
  corpus::SyntheticSpec s;
  s.languages = {"fr", "de", "en"};
  s.speech_languages = {"fr", "de"};
  s.vocab_size = 20;
  s.train_per_language = 30;
  s.test_per_language = 10;
  s.mt_pairs = {{"fr", "en"}};
  s.mt_per_pair = 15;
  s.s2tt_pairs = {{"de", "en"}};
  s.s2tt_per_pair = 8;
  s.seed = 3;
  return s;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::kContract;
}

}  // namespace

TEST(FrameFile, LayoutAndRoundTrip) {
  corpus::FrameFile f;
  f.dim = 2;
  f.frame_rate_hz = 50.0f;
  f.frames = {1.5f, -2.0f, 3.25f, 0.0f, 7.0f, 8.0f};
  const auto bytes = corpus::encode_frame_file(f);
  ASSERT_EQ(bytes.size(), corpus::kFrameHeaderBytes + 6 * 4);
  EXPECT_EQ(bytes.substr(0, 8), "DSPFRM01");
  std::uint32_t dim, count;
  float rate, first;
  std::memcpy(&dim, bytes.data() + 8, 4);
  std::memcpy(&count, bytes.data() + 12, 4);
  std::memcpy(&rate, bytes.data() + 16, 4);
  std::memcpy(&first, bytes.data() + 20, 4);
  EXPECT_EQ(dim, 2u);
  EXPECT_EQ(count, 3u);
  EXPECT_EQ(rate, 50.0f);
  EXPECT_EQ(first, 1.5f);
  const auto back = corpus::decode_frame_file(bytes);
  EXPECT_EQ(back.frames, f.frames);
  EXPECT_EQ(back.count(), 3u);
  EXPECT_EQ(kind_of([&] { corpus::decode_frame_file(bytes.substr(0, bytes.size() - 1)); }), ErrorKind::kIntegrity);
  EXPECT_EQ(kind_of([&] { corpus::decode_frame_file(bytes + "abcd"); }), ErrorKind::kIntegrity);
  EXPECT_EQ(kind_of([&] { corpus::decode_frame_file("DSPFRM01"); }), ErrorKind::kIntegrity);
  auto bad = bytes;
  bad[0] = 'x';
  EXPECT_EQ(kind_of([&] { corpus::decode_frame_file(bad); }), ErrorKind::kIntegrity);
  f.frames.pop_back();
  EXPECT_THROW(corpus::encode_frame_file(f), Error);
}

TEST(Manifest, ParsesRecordsAndSkipsBlankLines) {
  const std::string text =
      R"({"id":"a","language":"fr","task":"s2t","frames_path":"frames/a.dspf","transcript":"le chat ."})"
      "\n\n"
      R"({"id":"b","language":"fr","task":"mt","transcript":"le chat .","translation":{"target_lang":"en","text":"the cat ."}})"
      "\n"
      R"({"id":"c","language":"de","task":"s2tt","frames_path":"c.dspf","translation":{"target_lang":"en","text":"x ."},"concepts":[1,2]})"
      "\n";
  const auto recs = corpus::parse_manifest(text, "m.jsonl");
  ASSERT_EQ(recs.size(), 3u);
  EXPECT_EQ(recs[1].task, corpus::RecordTask::kMT);
  EXPECT_EQ(recs[1].translation->target_lang, "en");
  EXPECT_EQ(recs[2].concepts, (std::vector<int>{1, 2}));
  EXPECT_EQ(corpus::parse_manifest(corpus::render_manifest(recs)), recs);
}

TEST(Manifest, ErrorsNameSourceAndLine) {
  auto message = [](const std::string& text) {
    try {
      corpus::parse_manifest(text, "train.jsonl");
    } catch (const Error& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  const std::string ok = R"({"id":"a","language":"fr","task":"s2t","frames_path":"a","transcript":"t"})";
  EXPECT_NE(message(ok + "\n{not json\n").find("train.jsonl:2"), std::string::npos);
  EXPECT_NE(message(ok + "\n" + ok + "\n").find("duplicate id"), std::string::npos);
  EXPECT_NE(message(R"({"id":"a","language":"fr","task":"s2t","transcript":"t"})").find("frames_path"),
            std::string::npos);
  EXPECT_NE(message(R"({"id":"a","language":"fr","task":"asr"})").find("unknown task"), std::string::npos);
  EXPECT_NE(message(R"({"id":"a","language":"fr","task":"mt","transcript":"t"})").find("translation"),
            std::string::npos);
}

TEST(Synthetic, DeterministicUniqueAndSized) {
  const auto spec = small_spec();
  const auto a = corpus::generate_synthetic_corpus(spec);
  const auto b = corpus::generate_synthetic_corpus(spec);
  EXPECT_EQ(a.train_s2t, b.train_s2t);
  EXPECT_EQ(a.frames, b.frames);
  EXPECT_EQ(a.train_s2t.size(), 60u);
  EXPECT_EQ(a.test_s2t.size(), 20u);
  EXPECT_EQ(a.train_mt.size(), 15u);
  EXPECT_EQ(a.test_s2tt.size(), 8u);
  std::set<std::vector<int>> train_sentences, test_sentences;
  for (const auto& r : a.train_s2t) train_sentences.insert(r.concepts);
  for (const auto& r : a.train_mt) train_sentences.insert(r.concepts);
  for (const auto& r : a.test_s2t) test_sentences.insert(r.concepts);
  for (const auto& r : a.test_s2tt) test_sentences.insert(r.concepts);
  for (const auto& s : test_sentences) EXPECT_FALSE(train_sentences.count(s));
  auto other = spec;
  other.seed = 4;
  EXPECT_NE(corpus::generate_synthetic_corpus(other).train_s2t, a.train_s2t);
}

TEST(Synthetic, TextAndFramesFollowConcepts) {
  const auto spec = small_spec();
  const auto c = corpus::generate_synthetic_corpus(spec);
  const auto loader = c.loader();
  for (const auto& r : c.train_s2t) {
    std::string expect;
    for (int k : r.concepts) expect += c.surface.at(r.language)[static_cast<std::size_t>(k)] + " ";
    EXPECT_EQ(*r.transcript, expect + ".");
    EXPECT_GE(r.concepts.size(), spec.min_concepts);
    EXPECT_LE(r.concepts.size(), spec.max_concepts);
    const auto frames = loader(r);
    EXPECT_EQ(frames.dim, spec.frame_dim);
    EXPECT_EQ(frames.length(), r.concepts.size() * spec.frames_per_concept);
  }
  for (const auto& r : c.test_s2tt) {
    EXPECT_EQ(r.language, "de");
    EXPECT_EQ(r.translation->target_lang, "en");
    std::string source, target;
    for (int k : r.concepts) {
      source += c.surface.at("de")[static_cast<std::size_t>(k)] + " ";
      target += c.surface.at("en")[static_cast<std::size_t>(k)] + " ";
    }
    EXPECT_EQ(*r.transcript, source + ".");
    EXPECT_EQ(r.translation->text, target + ".");
  }
  for (const auto& r : c.train_mt) EXPECT_FALSE(r.frames_path.has_value());
}

TEST(Synthetic, SettingsValidationAndJson) {
  auto s = small_spec();
  EXPECT_EQ(corpus::synthetic_spec_from_json(corpus::to_json(s)).languages, s.languages);
  s.max_concepts = 30;
  EXPECT_EQ(kind_of([&] { s.validate(); }), ErrorKind::kSpec);
  s = small_spec();
  s.speech_languages = {"xx"};
  EXPECT_THROW(s.validate(), Error);
  s = small_spec();
  s.vocab_size = 3;
  s.min_concepts = 1;
  s.max_concepts = 1;
  EXPECT_THROW(s.validate(), Error);  // 3 distinct sentences cannot fill the splits
  auto j = corpus::to_json(small_spec());
  j["bogus"] = 1;
  EXPECT_THROW(corpus::synthetic_spec_from_json(j), Error);
}

TEST(Synthetic, WrittenCorpusReloadsFromDisk) {
  const auto dir = fs::temp_directory_path() / "dualspeech_synthetic_written";
  fs::remove_all(dir);
  const auto c = corpus::generate_synthetic_corpus(small_spec());
  corpus::write_synthetic_corpus(c, dir);
  for (const char* f : {"spec.json", "surface.json", "train_s2t.jsonl", "test_s2t.jsonl", "train_mt.jsonl",
                        "test_s2tt.jsonl"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  const auto train = corpus::load_manifest(dir / "train_s2t.jsonl");
  EXPECT_EQ(train, c.train_s2t);
  const auto from_disk = corpus::file_frame_loader(dir);
  const auto in_memory = c.loader();
  for (const auto& r : c.test_s2tt) EXPECT_EQ(from_disk(r).frames, in_memory(r).frames);
  auto missing = train.front();
  missing.frames_path = "frames/none.dspf";
  EXPECT_EQ(kind_of([&] { from_disk(missing); }), ErrorKind::kData);
  fs::remove_all(dir);
}

TEST(Dataset, PairsExamplesAndTexts) {
  const auto c = corpus::generate_synthetic_corpus(small_spec());
  const auto loader = c.loader();
  const vocab::UnifiedVocab v{vocab::TextVocab::byte_level(), 16};
  audio::Codebook cb;
  cb.k = 16;
  cb.dim = small_spec().frame_dim;
  cb.centroids.assign(cb.k * cb.dim, 0.0f);
  for (std::size_t i = 0; i < cb.k; ++i) cb.centroids[i * cb.dim] = static_cast<float>(i);
  const corpus::InputContext ctx{v, cb};
  const auto s2t = corpus::s2t_pairs(c.train_s2t, loader, ctx);
  ASSERT_EQ(s2t.size(), c.train_s2t.size());
  EXPECT_EQ(s2t[0].a.modality, vocab::Modality::kSpeech);
  EXPECT_EQ(v.text.detokenize(s2t[0].b.payload()), *c.train_s2t[0].transcript);
  const auto mt = corpus::mt_pairs(c.train_mt, ctx);
  ASSERT_EQ(mt.size(), c.train_mt.size());
  EXPECT_EQ(v.text.detokenize(mt[0].b.prefix()), "[English Text]");
  const auto ex = corpus::s2tt_examples(c.test_s2tt, loader, ctx);
  ASSERT_EQ(ex.size(), c.test_s2tt.size());
  EXPECT_EQ(ex[0].candidate_text, c.test_s2tt[0].translation->text);
  const auto texts = corpus::collect_texts(c.train_mt, true);
  EXPECT_NE(std::find(texts.begin(), texts.end(), "English Text"), texts.end());
  std::size_t dim = 0;
  const auto frames = corpus::collect_frames(c.train_s2t, loader, dim);
  EXPECT_EQ(dim, small_spec().frame_dim);
  EXPECT_EQ(frames.size() % dim, 0u);
  audio::Codebook wrong = cb;
  wrong.k = 5;
  EXPECT_THROW(corpus::s2t_pairs(c.train_s2t, loader, corpus::InputContext{v, wrong}), Error);
}

TEST(AppConfig, JsonRoundTripSeedAndUnknownKeys) {
  AppConfig cfg;
  cfg.set_seed(42);
  EXPECT_EQ(cfg.train.seed, 42u);
  EXPECT_EQ(cfg.codebook.seed, 42u);
  EXPECT_EQ(cfg.synthetic.seed, 42u);
  cfg.encoder.layers = 3;
  cfg.vocab.merges = 100;
  const auto back = app_config_from_json(to_json(cfg));
  EXPECT_EQ(back.encoder, cfg.encoder);
  EXPECT_EQ(back.vocab, cfg.vocab);
  EXPECT_EQ(back.train, cfg.train);
  const auto partial = app_config_from_json(json{{"seed", 7}, {"encoder", {{"m", 64}}}});
  EXPECT_EQ(partial.encoder.m, 64u);
  EXPECT_EQ(partial.train.seed, 7u);
  EXPECT_EQ(kind_of([] { app_config_from_json(json{{"trian", json::object()}}); }), ErrorKind::kConfig);
  EXPECT_THROW(app_config_from_json(json{{"train", {{"batch_size", 1}}}}), Error);
}
