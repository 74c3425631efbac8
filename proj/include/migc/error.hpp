#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace migc {

/// Machine-readable failure categories. The names are part of the CLI and
/// HTTP surface (`code=NAME`), so they must stay stable.
enum class ErrorCode {
  NonPositiveMass,
  MassSumError,
  DuplicateLabel,
  EmptyDistribution,
  OutOfRangeIndex,
  OverlappingCells,
  TooManyCells,
  InvalidQueryId,
  EmptyCandidates,
  InvalidTree,
  InvalidArgument,
  BudgetExceeded,
  InfeasibleQuerySet,
  TooLarge,
  KraftViolation,
  ImpossibleFleet,
  Solved,
  ContradictoryAnswer,
  InvalidAnswer,
  UnknownSession,
  SessionComplete,
  ParseError,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonPositiveMass: return "NonPositiveMass";
    case ErrorCode::MassSumError: return "MassSumError";
    case ErrorCode::DuplicateLabel: return "DuplicateLabel";
    case ErrorCode::EmptyDistribution: return "EmptyDistribution";
    case ErrorCode::OutOfRangeIndex: return "OutOfRangeIndex";
    case ErrorCode::OverlappingCells: return "OverlappingCells";
    case ErrorCode::TooManyCells: return "TooManyCells";
    case ErrorCode::InvalidQueryId: return "InvalidQueryId";
    case ErrorCode::EmptyCandidates: return "EmptyCandidates";
    case ErrorCode::InvalidTree: return "InvalidTree";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::InfeasibleQuerySet: return "InfeasibleQuerySet";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::KraftViolation: return "KraftViolation";
    case ErrorCode::ImpossibleFleet: return "ImpossibleFleet";
    case ErrorCode::Solved: return "Solved";
    case ErrorCode::ContradictoryAnswer: return "ContradictoryAnswer";
    case ErrorCode::InvalidAnswer: return "InvalidAnswer";
    case ErrorCode::UnknownSession: return "UnknownSession";
    case ErrorCode::SessionComplete: return "SessionComplete";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view code_name() const noexcept { return to_string(code_); }

 private:
  ErrorCode code_;
};

}  // namespace migc
