#include "dualspeech/corpus/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <set>

#include "dualspeech/common/error.hpp"
#include "dualspeech/common/io.hpp"
#include "dualspeech/common/rng.hpp"
#include "dualspeech/corpus/frame_file.hpp"
#include "dualspeech/vocab/languages.hpp"

namespace dualspeech::corpus {

using nlohmann::json;

namespace {

constexpr std::uint64_t kBaseStream = 1;
constexpr std::uint64_t kShiftStream = 2;
constexpr std::uint64_t kSurfaceStream = 3;
constexpr std::uint64_t kSentenceStream = 4;
constexpr std::uint64_t kNoiseStream = 5;

bool has_speech(const SyntheticSpec& spec, const std::string& lang) {
  if (spec.speech_languages.empty()) return true;
  return std::find(spec.speech_languages.begin(), spec.speech_languages.end(), lang) != spec.speech_languages.end();
}

std::string padded(std::size_t i) {
  std::string s = std::to_string(i);
  if (s.size() < 5) s.insert(0, 5 - s.size(), '0');
  return s;
}

/// Draws sentences (ordered lists of distinct concepts) never drawn before.
class SentenceSource {
 public:
  SentenceSource(const SyntheticSpec& spec, std::uint64_t seed) : spec_(spec), rng_(seed) {}

  std::vector<int> next() {
    for (;;) {
      const std::size_t span = spec_.max_concepts - spec_.min_concepts + 1;
      const std::size_t len = spec_.min_concepts + static_cast<std::size_t>(rng_.below(span));
      std::vector<int> pool(spec_.vocab_size);
      for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = static_cast<int>(i);
      std::vector<int> sentence;
      for (std::size_t i = 0; i < len; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng_.below(pool.size() - i));
        std::swap(pool[i], pool[j]);
        sentence.push_back(pool[i]);
      }
      if (seen_.insert(sentence).second) return sentence;
    }
  }

 private:
  const SyntheticSpec& spec_;
  Rng rng_;
  std::set<std::vector<int>> seen_;
};

struct Generator {
  const SyntheticSpec& spec;
  std::vector<std::vector<double>> base;               // concept -> dim
  std::map<std::string, std::vector<double>> shift;    // language -> dim
  std::map<std::string, std::vector<std::string>> surface;

  std::string text(const std::string& lang, const std::vector<int>& sentence) const {
    std::string out;
    for (int c : sentence) {
      out += surface.at(lang)[static_cast<std::size_t>(c)];
      out += ' ';
    }
    return out + ".";
  }

  std::vector<float> speech(const std::string& lang, const std::vector<int>& sentence, Rng& rng) const {
    std::vector<float> frames;
    const auto& sh = shift.at(lang);
    for (int c : sentence) {
      for (std::size_t f = 0; f < spec.frames_per_concept; ++f) {
        for (std::size_t d = 0; d < spec.frame_dim; ++d) {
          frames.push_back(static_cast<float>(base[static_cast<std::size_t>(c)][d] + sh[d] +
                                              spec.noise_std * rng.normal()));
        }
      }
    }
    return frames;
  }
};

}  // namespace

void SyntheticSpec::validate() const {
  auto bad = [](const std::string& msg) { fail(ErrorKind::kSpec, "synthetic spec: " + msg); };
  if (languages.empty()) bad("no languages");
  if (vocab_size == 0) bad("vocab_size must be positive");
  if (min_concepts == 0 || min_concepts > max_concepts) bad("need 1 <= min_concepts <= max_concepts");
  if (max_concepts > vocab_size) {
    bad("max_concepts " + std::to_string(max_concepts) + " exceeds vocab_size " + std::to_string(vocab_size) +
        " (concepts in a sentence are distinct)");
  }
  if (frames_per_concept == 0 || frame_dim == 0) bad("frames_per_concept and frame_dim must be positive");
  if (!(noise_std >= 0.0) || !(language_shift_std >= 0.0)) bad("noise must be non-negative");
  if (min_word_length == 0 || min_word_length > max_word_length) bad("bad word length range");
  // Enough distinct surface forms per language for one word per concept.
  double forms = 0.0;
  for (std::size_t l = min_word_length; l <= max_word_length && forms < 1e18; ++l) forms += std::pow(26.0, l);
  if (forms < static_cast<double>(vocab_size)) bad("word lengths too short for vocab_size distinct words");
  const auto& registry = vocab::LanguageRegistry::fleurs();
  std::set<std::string> known(languages.begin(), languages.end());
  if (known.size() != languages.size()) bad("duplicate language");
  for (const auto& l : languages) {
    if (!registry.contains(l)) bad("unknown language code '" + l + "'");
  }
  auto check_pair = [&](const LanguagePair& p) {
    if (!known.count(p.first) || !known.count(p.second)) bad("pair uses an unlisted language");
    if (p.first == p.second) bad("pair languages must differ");
  };
  for (const auto& l : speech_languages) {
    if (!known.count(l)) bad("speech language '" + l + "' is not listed");
  }
  for (const auto& p : mt_pairs) check_pair(p);
  for (const auto& p : s2tt_pairs) {
    check_pair(p);
    if (!has_speech(*this, p.first)) bad("s2tt source '" + p.first + "' has no speech");
  }
  // Distinct sentences needed versus available.
  double needed = 0.0;
  for (const auto& l : languages) {
    if (has_speech(*this, l)) needed += static_cast<double>(train_per_language + test_per_language);
  }
  needed += static_cast<double>(mt_pairs.size() * mt_per_pair + s2tt_pairs.size() * s2tt_per_pair);
  double available = 0.0;
  for (std::size_t len = min_concepts; len <= max_concepts && available < 1e18; ++len) {
    double perms = 1.0;
    for (std::size_t i = 0; i < len; ++i) perms *= static_cast<double>(vocab_size - i);
    available += perms;
  }
  if (needed > available / 2.0) bad("vocab too small for the requested number of distinct sentences");
}

json to_json(const SyntheticSpec& s) {
  return {{"languages", s.languages},
          {"speech_languages", s.speech_languages},
          {"vocab_size", s.vocab_size},
          {"min_concepts", s.min_concepts},
          {"max_concepts", s.max_concepts},
          {"frames_per_concept", s.frames_per_concept},
          {"frame_dim", s.frame_dim},
          {"noise_std", s.noise_std},
          {"language_shift_std", s.language_shift_std},
          {"frame_rate_hz", s.frame_rate_hz},
          {"min_word_length", s.min_word_length},
          {"max_word_length", s.max_word_length},
          {"train_per_language", s.train_per_language},
          {"test_per_language", s.test_per_language},
          {"mt_pairs", s.mt_pairs},
          {"mt_per_pair", s.mt_per_pair},
          {"s2tt_pairs", s.s2tt_pairs},
          {"s2tt_per_pair", s.s2tt_per_pair},
          {"seed", s.seed}};
}

SyntheticSpec synthetic_spec_from_json(const json& j) {
  static const std::set<std::string> keys = {
      "languages",      "speech_languages",   "vocab_size",     "min_concepts",       "max_concepts",
      "frames_per_concept", "frame_dim",      "noise_std",      "language_shift_std", "frame_rate_hz",
      "min_word_length", "max_word_length",   "train_per_language", "test_per_language", "mt_pairs",
      "mt_per_pair",    "s2tt_pairs",         "s2tt_per_pair",  "seed"};
  SyntheticSpec s;
  try {
    for (const auto& [key, value] : j.items()) {
      if (!keys.count(key)) fail(ErrorKind::kConfig, "synthetic spec: unknown key '" + key + "'");
    }
    s.languages = j.value("languages", s.languages);
    s.speech_languages = j.value("speech_languages", s.speech_languages);
    s.vocab_size = j.value("vocab_size", s.vocab_size);
    s.min_concepts = j.value("min_concepts", s.min_concepts);
    s.max_concepts = j.value("max_concepts", s.max_concepts);
    s.frames_per_concept = j.value("frames_per_concept", s.frames_per_concept);
    s.frame_dim = j.value("frame_dim", s.frame_dim);
    s.noise_std = j.value("noise_std", s.noise_std);
    s.language_shift_std = j.value("language_shift_std", s.language_shift_std);
    s.frame_rate_hz = j.value("frame_rate_hz", s.frame_rate_hz);
    s.min_word_length = j.value("min_word_length", s.min_word_length);
    s.max_word_length = j.value("max_word_length", s.max_word_length);
    s.train_per_language = j.value("train_per_language", s.train_per_language);
    s.test_per_language = j.value("test_per_language", s.test_per_language);
    s.mt_pairs = j.value("mt_pairs", s.mt_pairs);
    s.mt_per_pair = j.value("mt_per_pair", s.mt_per_pair);
    s.s2tt_pairs = j.value("s2tt_pairs", s.s2tt_pairs);
    s.s2tt_per_pair = j.value("s2tt_per_pair", s.s2tt_per_pair);
    s.seed = j.value("seed", s.seed);
  } catch (const json::exception& e) {
    fail(ErrorKind::kConfig, std::string("synthetic spec: ") + e.what());
  }
  return s;
}

FrameLoader SyntheticCorpus::loader() const {
  return [this](const ManifestRecord& r) {
    if (!r.frames_path) fail(ErrorKind::kData, "record '" + r.id + "' has no frames_path");
    const auto it = frames.find(*r.frames_path);
    if (it == frames.end()) fail(ErrorKind::kData, "record '" + r.id + "': no frames for " + *r.frames_path);
    audio::FrameSequence seq;
    seq.dim = spec.frame_dim;
    seq.frames = it->second;
    seq.source_id = r.id;
    seq.language = r.language;
    return seq;
  };
}

SyntheticCorpus generate_synthetic_corpus(const SyntheticSpec& spec) {
  spec.validate();
  SyntheticCorpus corpus;
  corpus.spec = spec;
  Generator gen{spec, {}, {}, {}};

  Rng base_rng(derive_seed(spec.seed, kBaseStream));
  gen.base.assign(spec.vocab_size, std::vector<double>(spec.frame_dim));
  for (auto& v : gen.base) {
    for (auto& x : v) x = base_rng.normal();
  }
  for (std::size_t l = 0; l < spec.languages.size(); ++l) {
    const std::string& lang = spec.languages[l];
    Rng shift_rng(derive_seed(spec.seed, kShiftStream, l));
    auto& sh = gen.shift[lang];
    sh.resize(spec.frame_dim);
    for (auto& x : sh) x = spec.language_shift_std * shift_rng.normal();

    Rng word_rng(derive_seed(spec.seed, kSurfaceStream, l));
    std::set<std::string> used;
    auto& words = gen.surface[lang];
    while (words.size() < spec.vocab_size) {
      const std::size_t len = spec.min_word_length +
                              static_cast<std::size_t>(word_rng.below(spec.max_word_length - spec.min_word_length + 1));
      std::string w;
      for (std::size_t i = 0; i < len; ++i) w += static_cast<char>('a' + word_rng.below(26));
      if (used.insert(w).second) words.push_back(w);
    }
  }
  corpus.surface = gen.surface;

  SentenceSource sentences(spec, derive_seed(spec.seed, kSentenceStream));
  Rng noise(derive_seed(spec.seed, kNoiseStream));
  auto speech_record = [&](const std::string& id, const std::string& lang, RecordTask task,
                           const std::vector<int>& sentence) {
    ManifestRecord r;
    r.id = id;
    r.language = lang;
    r.task = task;
    r.frames_path = "frames/" + id + ".dspf";
    r.transcript = gen.text(lang, sentence);
    r.concepts = sentence;
    corpus.frames[*r.frames_path] = gen.speech(lang, sentence, noise);
    return r;
  };

  for (const auto& lang : spec.languages) {
    if (!has_speech(spec, lang)) continue;
    for (std::size_t i = 0; i < spec.train_per_language; ++i) {
      corpus.train_s2t.push_back(
          speech_record("s2t-train-" + lang + "-" + padded(i), lang, RecordTask::kS2T, sentences.next()));
    }
    for (std::size_t i = 0; i < spec.test_per_language; ++i) {
      corpus.test_s2t.push_back(
          speech_record("s2t-test-" + lang + "-" + padded(i), lang, RecordTask::kS2T, sentences.next()));
    }
  }
  for (const auto& [src, tgt] : spec.mt_pairs) {
    for (std::size_t i = 0; i < spec.mt_per_pair; ++i) {
      const auto sentence = sentences.next();
      ManifestRecord r;
      r.id = "mt-train-" + src + "-" + tgt + "-" + padded(i);
      r.language = src;
      r.task = RecordTask::kMT;
      r.transcript = gen.text(src, sentence);
      r.translation = Translation{tgt, gen.text(tgt, sentence)};
      r.concepts = sentence;
      corpus.train_mt.push_back(std::move(r));
    }
  }
  for (const auto& [src, tgt] : spec.s2tt_pairs) {
    for (std::size_t i = 0; i < spec.s2tt_per_pair; ++i) {
      const auto sentence = sentences.next();
      ManifestRecord r =
          speech_record("s2tt-test-" + src + "-" + tgt + "-" + padded(i), src, RecordTask::kS2TT, sentence);
      r.translation = Translation{tgt, gen.text(tgt, sentence)};
      corpus.test_s2tt.push_back(std::move(r));
    }
  }
  return corpus;
}

void write_synthetic_corpus(const SyntheticCorpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "frames");
  io::write_file_atomic(dir / "spec.json", to_json(corpus.spec).dump(2) + "\n");
  io::write_file_atomic(dir / "surface.json", json(corpus.surface).dump(2) + "\n");
  write_manifest(dir / "train_s2t.jsonl", corpus.train_s2t);
  write_manifest(dir / "test_s2t.jsonl", corpus.test_s2t);
  write_manifest(dir / "train_mt.jsonl", corpus.train_mt);
  write_manifest(dir / "test_s2tt.jsonl", corpus.test_s2tt);
  for (const auto& [path, frames] : corpus.frames) {
    write_frame_file(dir / path, FrameFile{corpus.spec.frame_dim, corpus.spec.frame_rate_hz, frames});
  }
}

}  // namespace dualspeech::corpus
