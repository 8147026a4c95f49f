#ifndef RS2GS_ERROR_H_
#define RS2GS_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace rs2gs {

enum class ErrorCode {
  kInvalidArgument,
  kNonPositiveDepth,
  kNoConvergence,
  kEmptyScene,
  kDegenerateSystem,
  kNumericalFailure,
  kShapeMismatch,
  kInconsistentRows,
  kDegenerateRows,
  kRankDeficient,
  kCheiralityFailure,
  kGaugeDegenerate,
  kInsufficientCorrespondences,
  kNoModelFound,
  kEmptyAfterFiltering,
  kDivergedOrMaxIter,
  kBehindCamera,
  kDimensionMismatch,
  kDegenerateBaseline,
  kParseError,
  kEmptyFile,
  kBadMagic,
  kTruncatedData,
  kUnsupportedFormat,
  kCorruptHeader,
  kIoError,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rs2gs

#endif  // RS2GS_ERROR_H_
