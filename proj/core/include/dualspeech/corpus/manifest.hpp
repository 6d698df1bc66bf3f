#pragma once

#include <filesystem>
#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dualspeech::corpus {

enum class RecordTask { kS2T, kMT, kS2TT };

std::string_view record_task_name(RecordTask task);

struct Translation {
  std::string target_lang;
  std::string text;
  bool operator==(const Translation&) const = default;
};

/// One JSON line of a manifest:
///   {"id", "language", "task": "s2t"|"mt"|"s2tt", "frames_path"?, "transcript"?,
///    "translation"?: {"target_lang", "text"}, "concepts"?: [int]}
/// frames_path is relative to the manifest's directory unless absolute.
struct ManifestRecord {
  std::string id;
  std::string language;
  RecordTask task = RecordTask::kS2T;
  std::optional<std::string> frames_path;
  std::optional<std::string> transcript;
  std::optional<Translation> translation;
  std::vector<int> concepts;  ///< synthetic-corpus bookkeeping; empty otherwise

  bool operator==(const ManifestRecord&) const = default;
};

/// Checks the per-task required fields: s2t needs frames_path and
/// transcript, mt needs transcript and translation, s2tt needs frames_path
/// and translation.
void validate_record(const ManifestRecord& record);

nlohmann::json to_json(const ManifestRecord& record);
ManifestRecord record_from_json(const nlohmann::json& j);

/// Blank lines are skipped. Errors carry "<source>:<line>".
std::vector<ManifestRecord> parse_manifest(std::string_view text, const std::string& source = "manifest");
std::vector<ManifestRecord> load_manifest(const std::filesystem::path& path);
std::string render_manifest(const std::vector<ManifestRecord>& records);
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRecord>& records);

}  // namespace dualspeech::corpus
