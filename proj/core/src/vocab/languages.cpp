#include "dualspeech/vocab/languages.hpp"

#include <algorithm>
#include <set>

#include "dualspeech/common/error.hpp"

namespace dualspeech::vocab {

LanguageRegistry::LanguageRegistry(std::vector<LanguageInfo> languages) : languages_(std::move(languages)) {
  std::set<std::string> seen;
  for (const auto& l : languages_) {
    if (!seen.insert(l.code).second) fail(ErrorKind::kRegistry, "duplicate language code '" + l.code + "'");
  }
}

const LanguageInfo& LanguageRegistry::at(std::string_view code) const {
  auto it = std::find_if(languages_.begin(), languages_.end(), [&](const auto& l) { return l.code == code; });
  if (it == languages_.end()) fail(ErrorKind::kRegistry, "unknown language code '" + std::string(code) + "'");
  return *it;
}

bool LanguageRegistry::contains(std::string_view code) const {
  return std::any_of(languages_.begin(), languages_.end(), [&](const auto& l) { return l.code == code; });
}

const LanguageRegistry& LanguageRegistry::fleurs() {
  static const LanguageRegistry registry({
    {"af", "Afrikaans", "Indo-European"},
    {"am", "Amharic", "Afro-Asiatic"},
    {"ar", "Arabic", "Afro-Asiatic"},
    {"hy", "Armenian", "Indo-European"},
    {"as", "Assamese", "Indo-European"},
    {"ast", "Asturian", "Indo-European"},
    {"az", "Azerbaijani", "Turkic"},
    {"be", "Belarusian", "Indo-European"},
    {"bn", "Bengali", "Indo-European"},
    {"bs", "Bosnian", "Indo-European"},
    {"bg", "Bulgarian", "Indo-European"},
    {"my", "Burmese", "Sino-Tibetan"},
    {"yue", "Cantonese", "Sino-Tibetan"},
    {"ca", "Catalan", "Indo-European"},
    {"ceb", "Cebuano", "Austronesian"},
    {"hr", "Croatian", "Indo-European"},
    {"cs", "Czech", "Indo-European"},
    {"da", "Danish", "Indo-European"},
    {"nl", "Dutch", "Indo-European"},
    {"en", "English", "Indo-European"},
    {"et", "Estonian", "Uralic"},
    {"fil", "Filipino", "Austronesian"},
    {"fi", "Finnish", "Uralic"},
    {"fr", "French", "Indo-European"},
    {"ff", "Fula", "Atlantic-Congo"},
    {"gl", "Galician", "Indo-European"},
    {"lg", "Ganda", "Atlantic-Congo"},
    {"ka", "Georgian", "Kartvelian"},
    {"de", "German", "Indo-European"},
    {"el", "Greek", "Indo-European"},
    {"gu", "Gujarati", "Indo-European"},
    {"ha", "Hausa", "Afro-Asiatic"},
    {"he", "Hebrew", "Afro-Asiatic"},
    {"hi", "Hindi", "Indo-European"},
    {"hu", "Hungarian", "Uralic"},
    {"is", "Icelandic", "Indo-European"},
    {"ig", "Igbo", "Atlantic-Congo"},
    {"id", "Indonesian", "Austronesian"},
    {"ga", "Irish", "Indo-European"},
    {"it", "Italian", "Indo-European"},
    {"ja", "Japanese", "Japonic"},
    {"jv", "Javanese", "Austronesian"},
    {"kea", "Kabuverdianu", "Indo-European"},
    {"kam", "Kamba", "Atlantic-Congo"},
    {"kn", "Kannada", "Dravidian"},
    {"kk", "Kazakh", "Turkic"},
    {"km", "Khmer", "Austro-Asiatic"},
    {"ko", "Korean", "Koreanic"},
    {"ky", "Kyrgyz", "Turkic"},
    {"lo", "Lao", "Kra-Dai"},
    {"lv", "Latvian", "Indo-European"},
    {"ln", "Lingala", "Atlantic-Congo"},
    {"lt", "Lithuanian", "Indo-European"},
    {"luo", "Luo", "Nilo-Saharan"},
    {"lb", "Luxembourgish", "Indo-European"},
    {"mk", "Macedonian", "Indo-European"},
    {"ms", "Malay", "Austronesian"},
    {"ml", "Malayalam", "Dravidian"},
    {"mt", "Maltese", "Afro-Asiatic"},
    {"cmn", "Mandarin", "Sino-Tibetan"},
    {"mi", "Maori", "Austronesian"},
    {"mr", "Marathi", "Indo-European"},
    {"mn", "Mongolian", "Mongolic"},
    {"ne", "Nepali", "Indo-European"},
    {"nso", "Northern-Sotho", "Atlantic-Congo"},
    {"nb", "Norwegian", "Indo-European"},
    {"ny", "Nyanja", "Atlantic-Congo"},
    {"oc", "Occitan", "Indo-European"},
    {"or", "Oriya", "Indo-European"},
    {"om", "Oromo", "Afro-Asiatic"},
    {"ps", "Pashto", "Indo-European"},
    {"fa", "Persian", "Indo-European"},
    {"pl", "Polish", "Indo-European"},
    {"pt", "Portuguese", "Indo-European"},
    {"pa", "Punjabi", "Indo-European"},
    {"ro", "Romanian", "Indo-European"},
    {"ru", "Russian", "Indo-European"},
    {"sr", "Serbian", "Indo-European"},
    {"sn", "Shona", "Atlantic-Congo"},
    {"sd", "Sindhi", "Indo-European"},
    {"sk", "Slovak", "Indo-European"},
    {"sl", "Slovenian", "Indo-European"},
    {"so", "Somali", "Afro-Asiatic"},
    {"ckb", "Sorani-Kurdish", "Indo-European"},
    {"es", "Spanish", "Indo-European"},
    {"sw", "Swahili", "Atlantic-Congo"},
    {"sv", "Swedish", "Indo-European"},
    {"tg", "Tajik", "Indo-European"},
    {"ta", "Tamil", "Dravidian"},
    {"te", "Telugu", "Dravidian"},
    {"th", "Thai", "Kra-Dai"},
    {"tr", "Turkish", "Turkic"},
    {"uk", "Ukrainian", "Indo-European"},
    {"umb", "Umbundu", "Atlantic-Congo"},
    {"ur", "Urdu", "Indo-European"},
    {"uz", "Uzbek", "Turkic"},
    {"vi", "Vietnamese", "Austro-Asiatic"},
    {"cy", "Welsh", "Indo-European"},
    {"wo", "Wolof", "Atlantic-Congo"},
    {"xh", "Xhosa", "Atlantic-Congo"},
    {"yo", "Yoruba", "Atlantic-Congo"},
    {"zu", "Zulu", "Atlantic-Congo"},
  });
  return registry;
}

}  // namespace dualspeech::vocab
