#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fallsentry {

enum class ErrorCode {
  MalformedRecord,
  MissingHeader,
  InvariantViolation,
  DegeneratePoints,
  ZeroBaseline,
  InvalidConfig,
  OutOfOrderFrame,
  MissingLabel,
  EmptyResults,
  EmptyMatrix,
  InvalidSpec,
  Io,
};

inline constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::MissingHeader: return "MissingHeader";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::DegeneratePoints: return "DegeneratePoints";
    case ErrorCode::ZeroBaseline: return "ZeroBaseline";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::OutOfOrderFrame: return "OutOfOrderFrame";
    case ErrorCode::MissingLabel: return "MissingLabel";
    case ErrorCode::EmptyResults: return "EmptyResults";
    case ErrorCode::EmptyMatrix: return "EmptyMatrix";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

/// Single exception type for the library; `code()` tells callers which
/// contract was broken.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fallsentry
