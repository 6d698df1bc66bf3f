#include "dualspeech/common/error.hpp"

namespace dualspeech {

std::string_view error_class_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kDimension: return "DimensionError";
    case ErrorKind::kVocabulary: return "VocabularyError";
    case ErrorKind::kEmptySequence: return "EmptySequenceError";
    case ErrorKind::kContract: return "ContractError";
    case ErrorKind::kNumeric: return "NumericError";
    case ErrorKind::kInsufficientData: return "InsufficientDataError";
    case ErrorKind::kCodebook: return "CodebookError";
    case ErrorKind::kRegistry: return "RegistryError";
    case ErrorKind::kBatch: return "BatchError";
    case ErrorKind::kData: return "DataError";
    case ErrorKind::kIntegrity: return "IntegrityError";
    case ErrorKind::kConfig: return "ConfigError";
    case ErrorKind::kParse: return "ParseError";
    case ErrorKind::kValidation: return "ValidationError";
    case ErrorKind::kSpec: return "SpecError";
    case ErrorKind::kIo: return "IoError";
  }
  return "Error";
}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace dualspeech
