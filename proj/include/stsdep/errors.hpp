#ifndef STSDEP_ERRORS_HPP_
#define STSDEP_ERRORS_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace stsdep {

enum class ErrorCode {
  EmptyInput,
  InvalidCharacter,
  LengthMismatch,
  OutOfRange,
  InvalidSpec,
  InvalidParams,
  SequenceTooShort,
  NumericalFailure,
  IoError,
  FormatError,
  ChecksumMismatch,
  UnknownItem,
  ValueOutOfRange,
  RaggedRow,
  EmptyActiveSet,
  DegenerateSample,
  ActiveSetTooSmall,
  SizeMismatch,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InvalidCharacter: return "InvalidCharacter";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::SequenceTooShort: return "SequenceTooShort";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::UnknownItem: return "UnknownItem";
    case ErrorCode::ValueOutOfRange: return "ValueOutOfRange";
    case ErrorCode::RaggedRow: return "RaggedRow";
    case ErrorCode::EmptyActiveSet: return "EmptyActiveSet";
    case ErrorCode::DegenerateSample: return "DegenerateSample";
    case ErrorCode::ActiveSetTooSmall: return "ActiveSetTooSmall";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
  }
  return "Unknown";
}

// Every failure in the library is reported as an Error carrying a code, so
// callers (the CLI in particular) can map failures onto exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        message_(std::move(message)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& message() const noexcept { return message_; }

  // Same code, message prefixed with "context: ".
  Error with_context(const std::string& context) const {
    return Error(code_, context + ": " + message_);
  }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace stsdep

#endif  // STSDEP_ERRORS_HPP_
