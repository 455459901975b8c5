#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace shiftsum {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  DependentBasis,
  BudgetExceeded,
  SingularPoint,
  HypothesisViolated,
  MissingExponent,
  DegenerateFit,
  UnsupportedDegree,
  CodeTooLarge,
  RadiusOverflow,
  InsufficientStatistics,
  NumericalFailure,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Single exception type for the library; `code()` tells callers which
/// contract was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

  ErrorCode code() const noexcept { return code_; }
  /// The message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

inline std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DependentBasis: return "DependentBasis";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::SingularPoint: return "SingularPoint";
    case ErrorCode::HypothesisViolated: return "HypothesisViolated";
    case ErrorCode::MissingExponent: return "MissingExponent";
    case ErrorCode::DegenerateFit: return "DegenerateFit";
    case ErrorCode::UnsupportedDegree: return "UnsupportedDegree";
    case ErrorCode::CodeTooLarge: return "CodeTooLarge";
    case ErrorCode::RadiusOverflow: return "RadiusOverflow";
    case ErrorCode::InsufficientStatistics: return "InsufficientStatistics";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace shiftsum
