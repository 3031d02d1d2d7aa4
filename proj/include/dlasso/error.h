#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dlasso {

enum class ErrorCode {
  kInvalidArgument,
  kNotSymmetric,
  kNotUnitDiagonal,
  kNotPositiveDefinite,
  kNotAllowed,
  kCholeskyFailure,
  kNoConvergence,
  kHypothesisViolated,
  kLinfViolated,
  kL1ProductTooLarge,
  kDegenerateDenominator,
  kLambdaMismatch,
  kSingularSubmatrix,
  kZeroVector,
  kCertificationFailed,
  kMarginViolated,
  kInfNormViolated,
  kNotHighDimensional,
  kIrrepresentableViolated,
  kWeightConditionViolated,
  kSignInstability,
  kOddSampleSize,
  kDimensionTooLarge,
  kLOutOfRange,
  kParseError,
  kIoError,
};

std::string_view error_code_name(ErrorCode code);

/// Library-wide exception. `value()` carries the offending number when the
/// failure is a violated bound (NaN otherwise).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, double value);
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  double value() const noexcept { return value_; }

 private:
  ErrorCode code_;
  double value_;
};

/// True for the codes that mean "the requested instance does not satisfy
/// its certificate" as opposed to a usage or numerical failure.
bool is_certification_error(ErrorCode code);

}  // namespace dlasso
