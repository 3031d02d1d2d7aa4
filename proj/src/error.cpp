#include "dlasso/error.h"

#include <limits>

namespace dlasso {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kNotSymmetric: return "NotSymmetric";
    case ErrorCode::kNotUnitDiagonal: return "NotUnitDiagonal";
    case ErrorCode::kNotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::kNotAllowed: return "NotAllowed";
    case ErrorCode::kCholeskyFailure: return "CholeskyFailure";
    case ErrorCode::kNoConvergence: return "NoConvergence";
    case ErrorCode::kHypothesisViolated: return "HypothesisViolated";
    case ErrorCode::kLinfViolated: return "LinfViolated";
    case ErrorCode::kL1ProductTooLarge: return "L1ProductTooLarge";
    case ErrorCode::kDegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::kLambdaMismatch: return "LambdaMismatch";
    case ErrorCode::kSingularSubmatrix: return "SingularSubmatrix";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kCertificationFailed: return "CertificationFailed";
    case ErrorCode::kMarginViolated: return "MarginViolated";
    case ErrorCode::kInfNormViolated: return "InfNormViolated";
    case ErrorCode::kNotHighDimensional: return "NotHighDimensional";
    case ErrorCode::kIrrepresentableViolated: return "IrrepresentableViolated";
    case ErrorCode::kWeightConditionViolated: return "WeightConditionViolated";
    case ErrorCode::kSignInstability: return "SignInstability";
    case ErrorCode::kOddSampleSize: return "OddSampleSize";
    case ErrorCode::kDimensionTooLarge: return "DimensionTooLarge";
    case ErrorCode::kLOutOfRange: return "LOutOfRange";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message, double value)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
      code_(code),
      value_(value) {}

Error::Error(ErrorCode code, const std::string& message)
    : Error(code, message, std::numeric_limits<double>::quiet_NaN()) {}

bool is_certification_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotAllowed:
    case ErrorCode::kLinfViolated:
    case ErrorCode::kL1ProductTooLarge:
    case ErrorCode::kCertificationFailed:
    case ErrorCode::kMarginViolated:
    case ErrorCode::kInfNormViolated:
    case ErrorCode::kNotHighDimensional:
    case ErrorCode::kIrrepresentableViolated:
    case ErrorCode::kWeightConditionViolated:
    case ErrorCode::kSignInstability:
    case ErrorCode::kZeroVector:
    case ErrorCode::kDegenerateDenominator:
      return true;
    default:
      return false;
  }
}

}  // namespace dlasso
