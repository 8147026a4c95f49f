#include "rs2gs/error.h"

namespace rs2gs {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kNonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::kNoConvergence: return "NoConvergence";
    case ErrorCode::kEmptyScene: return "EmptyScene";
    case ErrorCode::kDegenerateSystem: return "DegenerateSystem";
    case ErrorCode::kNumericalFailure: return "NumericalFailure";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kInconsistentRows: return "InconsistentRows";
    case ErrorCode::kDegenerateRows: return "DegenerateRows";
    case ErrorCode::kRankDeficient: return "RankDeficient";
    case ErrorCode::kCheiralityFailure: return "CheiralityFailure";
    case ErrorCode::kGaugeDegenerate: return "GaugeDegenerate";
    case ErrorCode::kInsufficientCorrespondences:
      return "InsufficientCorrespondences";
    case ErrorCode::kNoModelFound: return "NoModelFound";
    case ErrorCode::kEmptyAfterFiltering: return "EmptyAfterFiltering";
    case ErrorCode::kDivergedOrMaxIter: return "DivergedOrMaxIter";
    case ErrorCode::kBehindCamera: return "BehindCamera";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kDegenerateBaseline: return "DegenerateBaseline";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kEmptyFile: return "EmptyFile";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kTruncatedData: return "TruncatedData";
    case ErrorCode::kUnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::kCorruptHeader: return "CorruptHeader";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace rs2gs
