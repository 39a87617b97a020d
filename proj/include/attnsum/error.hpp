#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace attnsum {

enum class ErrorCode {
  EmptyDocument,
  MissingSpecialToken,
  ParseError,
  Io,
  BadMagic,
  VersionMismatch,
  ShapeMismatch,
  TruncatedBlob,
  IdOutOfRange,
  SequenceTooLong,
  DimensionMismatch,
  TooShort,
  EmptyInput,
  NoContent,
  EmptyUniverse,
  UniverseMismatch,
  EmptySummary,
  EmptyCorpus,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-code mapping) can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyDocument: return "EmptyDocument";
    case ErrorCode::MissingSpecialToken: return "MissingSpecialToken";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::Io: return "Io";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::TruncatedBlob: return "TruncatedBlob";
    case ErrorCode::IdOutOfRange: return "IdOutOfRange";
    case ErrorCode::SequenceTooLong: return "SequenceTooLong";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::NoContent: return "NoContent";
    case ErrorCode::EmptyUniverse: return "EmptyUniverse";
    case ErrorCode::UniverseMismatch: return "UniverseMismatch";
    case ErrorCode::EmptySummary: return "EmptySummary";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace attnsum
