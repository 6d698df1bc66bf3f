#include "dualspeech/corpus/manifest.hpp"

#include <nlohmann/json.hpp>
#include <unordered_set>

#include "dualspeech/common/error.hpp"
#include "dualspeech/common/io.hpp"

namespace dualspeech::corpus {

using nlohmann::json;

std::string_view record_task_name(RecordTask task) {
  switch (task) {
    case RecordTask::kS2T: return "s2t";
    case RecordTask::kMT: return "mt";
    case RecordTask::kS2TT: return "s2tt";
  }
  return "s2t";
}

void validate_record(const ManifestRecord& r) {
  auto bad = [&](const std::string& msg) { fail(ErrorKind::kValidation, "record '" + r.id + "': " + msg); };
  if (r.id.empty()) fail(ErrorKind::kValidation, "record without id");
  if (r.language.empty()) bad("missing language");
  switch (r.task) {
    case RecordTask::kS2T:
      if (!r.frames_path) bad("s2t record needs frames_path");
      if (!r.transcript) bad("s2t record needs transcript");
      break;
    case RecordTask::kMT:
      if (!r.transcript) bad("mt record needs transcript");
      if (!r.translation) bad("mt record needs translation");
      break;
    case RecordTask::kS2TT:
      if (!r.frames_path) bad("s2tt record needs frames_path");
      if (!r.translation) bad("s2tt record needs translation");
      break;
  }
}

json to_json(const ManifestRecord& r) {
  json j = {{"id", r.id}, {"language", r.language}, {"task", record_task_name(r.task)}};
  if (r.frames_path) j["frames_path"] = *r.frames_path;
  if (r.transcript) j["transcript"] = *r.transcript;
  if (r.translation) j["translation"] = {{"target_lang", r.translation->target_lang}, {"text", r.translation->text}};
  if (!r.concepts.empty()) j["concepts"] = r.concepts;
  return j;
}

ManifestRecord record_from_json(const json& j) {
  if (!j.is_object()) fail(ErrorKind::kParse, "record is not a JSON object");
  ManifestRecord r;
  try {
    r.id = j.at("id").get<std::string>();
    r.language = j.at("language").get<std::string>();
    const std::string task = j.at("task").get<std::string>();
    if (task == "s2t") r.task = RecordTask::kS2T;
    else if (task == "mt") r.task = RecordTask::kMT;
    else if (task == "s2tt") r.task = RecordTask::kS2TT;
    else fail(ErrorKind::kValidation, "record '" + r.id + "': unknown task '" + task + "'");
    if (j.contains("frames_path")) r.frames_path = j.at("frames_path").get<std::string>();
    if (j.contains("transcript")) r.transcript = j.at("transcript").get<std::string>();
    if (j.contains("translation")) {
      const json& t = j.at("translation");
      r.translation = Translation{t.at("target_lang").get<std::string>(), t.at("text").get<std::string>()};
    }
    if (j.contains("concepts")) r.concepts = j.at("concepts").get<std::vector<int>>();
  } catch (const json::exception& e) {
    fail(ErrorKind::kParse, std::string("record schema: ") + e.what());
  }
  validate_record(r);
  return r;
}

std::vector<ManifestRecord> parse_manifest(std::string_view text, const std::string& source) {
  std::vector<ManifestRecord> records;
  std::unordered_set<std::string> ids;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const std::string where = source + ":" + std::to_string(line_no) + ": ";
    try {
      json j = json::parse(line);
      ManifestRecord r = record_from_json(j);
      if (!ids.insert(r.id).second) fail(ErrorKind::kValidation, "duplicate id '" + r.id + "'");
      records.push_back(std::move(r));
    } catch (const json::exception& e) {
      fail(ErrorKind::kParse, where + e.what());
    } catch (const Error& e) {
      fail(e.kind(), where + e.what());
    }
  }
  return records;
}

std::vector<ManifestRecord> load_manifest(const std::filesystem::path& path) {
  return parse_manifest(io::read_file(path), path.string());
}

std::string render_manifest(const std::vector<ManifestRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    validate_record(r);
    out += to_json(r).dump();
    out += '\n';
  }
  return out;
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRecord>& records) {
  io::write_file_atomic(path, render_manifest(records));
}

}  // namespace dualspeech::corpus
