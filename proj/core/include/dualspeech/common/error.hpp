#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dualspeech {

/// Error classes surfaced by the library. The CLI prints the class name as a
/// stable machine-parsable token before the message.
enum class ErrorKind {
  kDimension,
  kVocabulary,
  kEmptySequence,
  kContract,
  kNumeric,
  kInsufficientData,
  kCodebook,
  kRegistry,
  kBatch,
  kData,
  kIntegrity,
  kConfig,
  kParse,
  kValidation,
  kSpec,
  kIo,
};

std::string_view error_class_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::string_view class_name() const { return error_class_name(kind_); }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace dualspeech
