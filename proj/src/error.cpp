#include "frechet_tree/error.hpp"

namespace frechet_tree {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::Disconnected: return "Disconnected";
    case ErrorCode::NonpositiveLength: return "NonpositiveLength";
    case ErrorCode::DuplicateEdge: return "DuplicateEdge";
    case ErrorCode::UnknownVertex: return "UnknownVertex";
    case ErrorCode::InvalidPoint: return "InvalidPoint";
    case ErrorCode::ParameterOutOfRange: return "ParameterOutOfRange";
    case ErrorCode::CoincidentPoints: return "CoincidentPoints";
    case ErrorCode::InvalidSegment: return "InvalidSegment";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::CustomValidationFailed: return "CustomValidationFailed";
    case ErrorCode::MassNotOne: return "MassNotOne";
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::OverlappingDensityPieces: return "OverlappingDensityPieces";
    case ErrorCode::TreeMismatch: return "TreeMismatch";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::NotIncreasingLoss: return "NotIncreasingLoss";
    case ErrorCode::ToleranceTooCoarse: return "ToleranceTooCoarse";
    case ErrorCode::AmbiguousClassification: return "AmbiguousClassification";
    case ErrorCode::NotSticky: return "NotSticky";
    case ErrorCode::NumericalInconsistency: return "NumericalInconsistency";
    case ErrorCode::ClassificationMismatch: return "ClassificationMismatch";
    case ErrorCode::NotPartlySticky: return "NotPartlySticky";
    case ErrorCode::ExpansionMismatch: return "ExpansionMismatch";
    case ErrorCode::ThresholdOutOfRange: return "ThresholdOutOfRange";
    case ErrorCode::SampleSizeTooSmall: return "SampleSizeTooSmall";
    case ErrorCode::UnsupportedLoss: return "UnsupportedLoss";
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
  }
  return "Unknown";
}

}  // namespace frechet_tree
