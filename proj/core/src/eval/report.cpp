#include "dualspeech/eval/report.hpp"

#include <cstdio>
#include <map>

#include "dualspeech/common/error.hpp"
#include "dualspeech/common/io.hpp"

namespace dualspeech::eval {

using nlohmann::json;

namespace {

json optional_value(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> read_optional(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

std::string fixed(const std::optional<double>& v, int digits) {
  if (!v) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, *v);
  return buf;
}

struct Lookup {
  std::string name;
  std::string family;
};

Lookup lookup(const vocab::LanguageRegistry& registry, const std::string& code) {
  if (!registry.contains(code)) return {code, "Other"};
  const auto& info = registry.at(code);
  return {info.name, info.family};
}

}  // namespace

json to_json(const EvalReport& r) {
  json langs = json::array();
  for (const auto& l : r.languages) {
    langs.push_back({{"language", l.language},
                     {"count", l.count},
                     {"r_at_1", l.r_at_1},
                     {"wer", optional_value(l.wer)},
                     {"bleu", optional_value(l.bleu)}});
  }
  return {{"task", r.task},
          {"aggregate", {{"r_at_1", r.r_at_1}, {"wer", optional_value(r.wer)}, {"bleu", optional_value(r.bleu)}}},
          {"languages", std::move(langs)},
          {"provenance", r.provenance}};
}

EvalReport report_from_json(const json& j) {
  EvalReport r;
  try {
    r.task = j.at("task").get<std::string>();
    const json& agg = j.at("aggregate");
    r.r_at_1 = agg.at("r_at_1").get<double>();
    r.wer = read_optional(agg, "wer");
    r.bleu = read_optional(agg, "bleu");
    for (const json& l : j.at("languages")) {
      LanguageResult res;
      res.language = l.at("language").get<std::string>();
      res.count = l.at("count").get<std::size_t>();
      res.r_at_1 = l.at("r_at_1").get<double>();
      res.wer = read_optional(l, "wer");
      res.bleu = read_optional(l, "bleu");
      r.languages.push_back(std::move(res));
    }
    r.provenance = j.value("provenance", json::object());
  } catch (const json::exception& e) {
    fail(ErrorKind::kParse, std::string("eval report: ") + e.what());
  }
  return r;
}

std::string render_group_csv(const EvalReport& report, const vocab::LanguageRegistry& registry) {
  struct Group {
    std::size_t languages = 0;
    double r_at_1 = 0.0;
    double wer = 0.0;
    double bleu = 0.0;
    bool has_wer = false;
    bool has_bleu = false;
  };
  std::map<std::string, Group> groups;
  for (const auto& l : report.languages) {
    Group& g = groups[lookup(registry, l.language).family];
    ++g.languages;
    g.r_at_1 += l.r_at_1;
    if (l.wer) {
      g.wer += *l.wer;
      g.has_wer = true;
    }
    if (l.bleu) {
      g.bleu += *l.bleu;
      g.has_bleu = true;
    }
  }
  std::string out = "family,languages,r_at_1,wer,bleu\n";
  for (const auto& [family, g] : groups) {
    const double n = static_cast<double>(g.languages);
    out += family + "," + std::to_string(g.languages) + "," + fixed(g.r_at_1 / n, 4) + "," +
           fixed(g.has_wer ? std::optional(g.wer / n) : std::nullopt, 4) + "," +
           fixed(g.has_bleu ? std::optional(g.bleu / n) : std::nullopt, 2) + "\n";
  }
  return out;
}

std::string render_language_tsv(const EvalReport& report, const vocab::LanguageRegistry& registry) {
  std::string out = "code\tname\tfamily\tcount\tr_at_1\twer\tbleu\n";
  for (const auto& l : report.languages) {
    const Lookup info = lookup(registry, l.language);
    out += l.language + "\t" + info.name + "\t" + info.family + "\t" + std::to_string(l.count) + "\t" +
           fixed(l.r_at_1, 4) + "\t" + fixed(l.wer, 4) + "\t" + fixed(l.bleu, 2) + "\n";
  }
  return out;
}

void save_report(const EvalReport& report, const std::filesystem::path& path) {
  io::write_file_atomic(path, to_json(report).dump(2) + "\n");
}

EvalReport load_report(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::exception& e) {
    fail(ErrorKind::kParse, path.string() + ": " + e.what());
  }
  return report_from_json(j);
}

}  // namespace dualspeech::eval
