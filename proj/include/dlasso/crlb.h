#pragma once

#include <string>
#include <vector>

#include "dlasso/eligible_pairs.h"
#include "dlasso/gaussian_models.h"

namespace dlasso {

enum class ClassKind { kL0, kL1, kLr };

struct ModelClass {
  ClassKind kind = ClassKind::kL1;
  double r = 1.0;
  double s = 1.0;
  Index n = 1;
  /// Multiplier M in the budget M n^{r/2} s^{(2-r)/2}.
  double m = 1.0;
  /// Budget on ||c||_r^r (r = 1), on the support size (r = 0).
  double budget() const;
};

enum class CrlbMethod { kClosedForm, kL1PathBisect, kL0Enumeration };

struct CrlbResult {
  double bound = 0.0;
  Vector argmin_c;
  double constraint_value = 0.0;
  CrlbMethod method = CrlbMethod::kClosedForm;
  /// Residual variance 1 - 2 Sigma_{1,-1} c + c' A c at argmin_c.
  double residual_variance = 0.0;
  int iterations = 0;
};

/// min_{||c||_1 <= budget} E(x_1 - x_{-1} c)^2, inverted.
CrlbResult crlb_l1(const CovarianceModel& model, double budget);

/// min over supports of size <= s_free, inverted. Throws DimensionTooLarge for p > 22.
CrlbResult crlb_l0(const CovarianceModel& model, Index s_free);

/// (Sigma_{S0,S0}^{-1})_{11} where S0 contains coordinate 1 plus `support`
/// (indices into gamma coordinates).
double crlb_known_support(const CovarianceModel& model, const IndexSet& support);

struct CrlbReport {
  std::string class_name;
  double budget = 0.0;
  double crlb = 0.0;
  /// For the lr class: the l0 and l1 bounds that bracket it.
  double bracket_low = 0.0;
  double bracket_high = 0.0;
  double theta11 = 0.0;
  double theta11_sharp = 0.0;
  double gamma_sharp_size = 0.0;
  bool feasible = false;
  double tolerance = 0.0;
  bool crlb_dominates = false;  // crlb >= theta11_sharp - tolerance
  std::string verdict;
};

CrlbReport crlb_compare(const CovarianceModel& model, const EligiblePair& pair,
                        const SharpDirection& direction, const ModelClass& cls);

std::string method_name(CrlbMethod method);
std::string class_name(ClassKind kind);

}  // namespace dlasso
