#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace siot {

enum class ErrorCode {
  MalformedRow,
  UnknownCategory,
  OutOfRangeCoordinate,
  EmptyCatalog,
  InvalidConfig,
  InvalidThreshold,
  SelfLoop,
  NodeOutOfRange,
  NonPositiveWeight,
  DimensionMismatch,
  EmptyLabelMask,
  PerplexityTooLarge,
  TooFewPoints,
  InvalidK,
  InvalidRange,
  InvalidParams,
  DegenerateGraph,
  LengthMismatch,
  TooLarge,
  ConfigError,
  IoError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::UnknownCategory: return "UnknownCategory";
    case ErrorCode::OutOfRangeCoordinate: return "OutOfRangeCoordinate";
    case ErrorCode::EmptyCatalog: return "EmptyCatalog";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidThreshold: return "InvalidThreshold";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::NodeOutOfRange: return "NodeOutOfRange";
    case ErrorCode::NonPositiveWeight: return "NonPositiveWeight";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyLabelMask: return "EmptyLabelMask";
    case ErrorCode::PerplexityTooLarge: return "PerplexityTooLarge";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::InvalidK: return "InvalidK";
    case ErrorCode::InvalidRange: return "InvalidRange";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::DegenerateGraph: return "DegenerateGraph";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure in the library is reported as an Error carrying a code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code), detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

  /// Same code, message prefixed with where it happened.
  Error with_context(const std::string& context) const { return Error(code_, context + ": " + detail_); }

 private:
  ErrorCode code_;
  std::string detail_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace siot
