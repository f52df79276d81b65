#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fpl {

enum class ErrorCode {
  NoMutualExistence,
  EmptyKeepSet,
  UnknownAspect,
  ValueOutsideView,
  InvalidView,
  InfeasibleSpec,
  InvalidPainting,
  OutOfGrid,
  DuplicateCoordinates,
  InvalidPool,
  UnsolvablePool,
  InconsistentSignatures,
  ForeignElement,
  InvalidUniverse,
  UnknownLabel,
  InvalidArgument,
  NotReached,
  UniverseMismatch,
  BudgetExhausted,
  InconsistentReplicas,
  AmbiguityExhausted,
  ConfigError,
  MissingInput,
  ParseError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NoMutualExistence: return "NoMutualExistence";
    case ErrorCode::EmptyKeepSet: return "EmptyKeepSet";
    case ErrorCode::UnknownAspect: return "UnknownAspect";
    case ErrorCode::ValueOutsideView: return "ValueOutsideView";
    case ErrorCode::InvalidView: return "InvalidView";
    case ErrorCode::InfeasibleSpec: return "InfeasibleSpec";
    case ErrorCode::InvalidPainting: return "InvalidPainting";
    case ErrorCode::OutOfGrid: return "OutOfGrid";
    case ErrorCode::DuplicateCoordinates: return "DuplicateCoordinates";
    case ErrorCode::InvalidPool: return "InvalidPool";
    case ErrorCode::UnsolvablePool: return "UnsolvablePool";
    case ErrorCode::InconsistentSignatures: return "InconsistentSignatures";
    case ErrorCode::ForeignElement: return "ForeignElement";
    case ErrorCode::InvalidUniverse: return "InvalidUniverse";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NotReached: return "NotReached";
    case ErrorCode::UniverseMismatch: return "UniverseMismatch";
    case ErrorCode::BudgetExhausted: return "BudgetExhausted";
    case ErrorCode::InconsistentReplicas: return "InconsistentReplicas";
    case ErrorCode::AmbiguityExhausted: return "AmbiguityExhausted";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::MissingInput: return "MissingInput";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace fpl
