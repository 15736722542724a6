#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pcmr {

enum class ErrorCode {
  NonPositiveEntry,
  ReciprocityViolation,
  OrderTooSmall,
  OrderMismatch,
  ParseError,
  MissingRandomIndex,
  ThresholdOutOfRange,
  ConvergenceFailure,
  InadmissibleSpec,
  InadmissibleQuery,
  BranchLimit,
  WorkBudgetExceeded,
  Timeout,
  EditOutOfBounds,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveEntry: return "NonPositiveEntry";
    case ErrorCode::ReciprocityViolation: return "ReciprocityViolation";
    case ErrorCode::OrderTooSmall: return "OrderTooSmall";
    case ErrorCode::OrderMismatch: return "OrderMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MissingRandomIndex: return "MissingRandomIndex";
    case ErrorCode::ThresholdOutOfRange: return "ThresholdOutOfRange";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::InadmissibleSpec: return "InadmissibleSpec";
    case ErrorCode::InadmissibleQuery: return "InadmissibleQuery";
    case ErrorCode::BranchLimit: return "BranchLimit";
    case ErrorCode::WorkBudgetExceeded: return "WorkBudgetExceeded";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::EditOutOfBounds: return "EditOutOfBounds";
  }
  return "Unknown";
}

/// Exception carrying a machine-readable code and, where it applies, the
/// 1-based cell (row, col) the problem was found at. Zero means "no cell".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, int row = 0, int col = 0)
      : std::runtime_error(message), code_(code), row_(row), col_(col) {}

  ErrorCode code() const noexcept { return code_; }
  int row() const noexcept { return row_; }
  int col() const noexcept { return col_; }

  /// True for errors caused by bad caller input (as opposed to solver or
  /// environment trouble).
  bool is_validation() const noexcept {
    switch (code_) {
      case ErrorCode::NonPositiveEntry:
      case ErrorCode::ReciprocityViolation:
      case ErrorCode::OrderTooSmall:
      case ErrorCode::OrderMismatch:
      case ErrorCode::ParseError:
      case ErrorCode::ThresholdOutOfRange:
      case ErrorCode::InadmissibleSpec:
      case ErrorCode::InadmissibleQuery:
      case ErrorCode::EditOutOfBounds:
        return true;
      default:
        return false;
    }
  }

 private:
  ErrorCode code_;
  int row_;
  int col_;
};

}  // namespace pcmr
