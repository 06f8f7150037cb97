#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mind {

enum class ErrorKind {
  // manifest / data
  DuplicateId,
  MissingField,
  BadSplit,
  BadLabel,
  ParseError,
  IoError,
  // retrieval
  ZeroNormModality,
  ZeroNormVector,
  DimensionMismatch,
  NonFiniteValue,
  MissingEmbedding,
  EmptyReferenceSet,
  KTooLarge,
  UnknownTargetId,
  // backend
  Timeout,
  TransportError,
  BadStatus,
  EmptyResponse,
  NoDefaultRule,
  UnreadableImage,
  InvalidMessage,
  // prompts / agents
  MissingPlaceholder,
  DuplicatePlaceholder,
  EmptyDerivation,
  NoAnswerLine,
  AmbiguousAnswer,
  JudgmentUnparseable,
  // evaluation / cli
  NoScoredSamples,
  EmptySweep,
  ConfigError,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DuplicateId: return "DuplicateId";
    case ErrorKind::MissingField: return "MissingField";
    case ErrorKind::BadSplit: return "BadSplit";
    case ErrorKind::BadLabel: return "BadLabel";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::ZeroNormModality: return "ZeroNormModality";
    case ErrorKind::ZeroNormVector: return "ZeroNormVector";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::MissingEmbedding: return "MissingEmbedding";
    case ErrorKind::EmptyReferenceSet: return "EmptyReferenceSet";
    case ErrorKind::KTooLarge: return "KTooLarge";
    case ErrorKind::UnknownTargetId: return "UnknownTargetId";
    case ErrorKind::Timeout: return "Timeout";
    case ErrorKind::TransportError: return "TransportError";
    case ErrorKind::BadStatus: return "BadStatus";
    case ErrorKind::EmptyResponse: return "EmptyResponse";
    case ErrorKind::NoDefaultRule: return "NoDefaultRule";
    case ErrorKind::UnreadableImage: return "UnreadableImage";
    case ErrorKind::InvalidMessage: return "InvalidMessage";
    case ErrorKind::MissingPlaceholder: return "MissingPlaceholder";
    case ErrorKind::DuplicatePlaceholder: return "DuplicatePlaceholder";
    case ErrorKind::EmptyDerivation: return "EmptyDerivation";
    case ErrorKind::NoAnswerLine: return "NoAnswerLine";
    case ErrorKind::AmbiguousAnswer: return "AmbiguousAnswer";
    case ErrorKind::JudgmentUnparseable: return "JudgmentUnparseable";
    case ErrorKind::NoScoredSamples: return "NoScoredSamples";
    case ErrorKind::EmptySweep: return "EmptySweep";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

/// Every failure raised by the library. `kind()` is stable and meant for
/// programmatic dispatch; `what()` carries the human-readable detail
/// (offending id, row, file line, ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind), detail_(detail) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }
  [[nodiscard]] const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace mind
