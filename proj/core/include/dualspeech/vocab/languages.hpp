#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dualspeech::vocab {

struct LanguageInfo {
  std::string code;
  std::string name;    ///< English display name used in task prefixes.
  std::string family;  ///< Language group for grouped report tables.
};

/// Code -> display name lookup. The default registry carries the 102 FLEURS
/// languages.
class LanguageRegistry {
 public:
  explicit LanguageRegistry(std::vector<LanguageInfo> languages);

  static const LanguageRegistry& fleurs();

  const LanguageInfo& at(std::string_view code) const;
  bool contains(std::string_view code) const;
  std::span<const LanguageInfo> all() const { return languages_; }

 private:
  std::vector<LanguageInfo> languages_;
};

}  // namespace dualspeech::vocab
