#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace frechet_tree {

enum class ErrorCode {
  // metric-tree
  CycleDetected,
  Disconnected,
  NonpositiveLength,
  DuplicateEdge,
  UnknownVertex,
  InvalidPoint,
  ParameterOutOfRange,
  CoincidentPoints,
  InvalidSegment,
  // loss
  InvalidParameter,
  CustomValidationFailed,
  // measure
  MassNotOne,
  NegativeWeight,
  OverlappingDensityPieces,
  TreeMismatch,
  EmptySample,
  // solver
  NotIncreasingLoss,
  ToleranceTooCoarse,
  AmbiguousClassification,
  NotSticky,
  NumericalInconsistency,
  // harness
  ClassificationMismatch,
  NotPartlySticky,
  ExpansionMismatch,
  ThresholdOutOfRange,
  SampleSizeTooSmall,
  UnsupportedLoss,
  // cli
  FileNotFound,
  ParseError,
  ValidationError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code),
        detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace frechet_tree
