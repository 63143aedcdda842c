#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace firmsaudit {

enum class ErrorCode {
  Io,
  MissingColumn,
  Parse,
  EmptyDataset,
  DegenerateTable,
  PredicateParse,
  EmptySubset,
  ClassTooSmall,
  EmptyTrainingSet,
  EmptyTestSet,
  SingleLeafTree,
  InsufficientData,
  SpecInvalid,
  InvalidCellSize,
  InvalidBandWidth,
  InvalidArgument,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io: return "IoError";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::Parse: return "ParseError";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::DegenerateTable: return "DegenerateTable";
    case ErrorCode::PredicateParse: return "PredicateParseError";
    case ErrorCode::EmptySubset: return "EmptySubset";
    case ErrorCode::ClassTooSmall: return "ClassTooSmall";
    case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::EmptyTestSet: return "EmptyTestSet";
    case ErrorCode::SingleLeafTree: return "SingleLeafTree";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::SpecInvalid: return "SpecInvalid";
    case ErrorCode::InvalidCellSize: return "InvalidCellSize";
    case ErrorCode::InvalidBandWidth: return "InvalidBandWidth";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Every recoverable failure in the toolkit is reported as an AuditError
/// carrying a machine-checkable code.
class AuditError : public std::runtime_error {
 public:
  AuditError(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace firmsaudit
