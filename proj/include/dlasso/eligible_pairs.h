#pragma once

#include <optional>
#include <string>

#include "dlasso/gaussian_models.h"
#include "dlasso/types.h"

namespace dlasso {

/// Candidate sparse surrogate (gamma_sharp, lambda_sharp) for gamma0 with
/// its two certificate numbers.
struct EligiblePair {
  Vector gamma_sharp;
  double lambda_sharp = 0.0;
  /// ||Sigma_{-1,-1}(gamma_sharp - gamma0)||_inf.
  double linf_residual = 0.0;
  /// lambda_sharp * ||gamma_sharp||_1.
  double l1_product = 0.0;
};

struct PairCheck {
  EligiblePair pair;
  bool linf_ok = false;
  bool l1_ok = false;
  bool eligible() const { return linf_ok && l1_ok; }
};

/// Evaluates both conditions without throwing. The sup-norm test allows a
/// relative round-off of 1e-9 so that pairs built with equality pass.
PairCheck check_pair(const CovarianceModel& model, const Vector& gamma_sharp,
                     double lambda_sharp, double eps_eligible = 0.05);

/// As check_pair, throwing LinfViolated or L1ProductTooLarge with the
/// offending value.
EligiblePair certify_pair(const CovarianceModel& model, const Vector& gamma_sharp,
                          double lambda_sharp, double eps_eligible = 0.05);

struct SharpDirection {
  Vector theta1_sharp;
  double theta11_sharp = 0.0;
  double lambda0_sharp = 0.0;
  /// theta11 - theta11_sharp.
  double improvement = 0.0;
  /// 1 - Sigma_{1,-1} gamma_sharp.
  double denominator = 0.0;
  /// Theta1_sharp' Sigma Theta1_sharp.
  double quad_form = 0.0;
  /// ||Sigma Theta1_sharp - e_1||_inf (equals ||Sigma(Theta1_sharp - Theta1)||_inf).
  double sup_residual = 0.0;

  bool quad_form_ok = false;    // |quad_form - theta11_sharp| <= 2 l1 / denominator^2
  bool variance_ok = false;     // theta11_sharp <= theta11 + 2 l1 / lambda_min^4
  bool sup_residual_ok = false; // sup_residual <= lambda0_sharp
  bool denominator_ok = false;  // denominator >= lambda_min^2 - 2 l1
  bool all_ok() const { return quad_form_ok && variance_ok && sup_residual_ok && denominator_ok; }
};

/// Throws DegenerateDenominator when 1 - Sigma_{1,-1} gamma_sharp <= 1e-10.
SharpDirection sharp_direction(const CovarianceModel& model, const EligiblePair& pair);

struct PairDistance {
  /// (gA - gB)' Sigma_{-1,-1} (gA - gB).
  double distance = 0.0;
  /// 2 lambda ||gA - gB||_1: the bound implied by the two sup-norm conditions.
  double bound = 0.0;
  /// lambda (||gA||_1 + ||gB||_1), reported for reference.
  double reference_bound = 0.0;
  bool bound_holds = false;
  double slack() const { return bound - distance; }
};

/// Throws LambdaMismatch unless both pairs share lambda_sharp (relative 1e-12).
PairDistance pair_distance(const CovarianceModel& model, const EligiblePair& a,
                           const EligiblePair& b);

struct ProjectionResult {
  /// Projection of x_{-1} gamma0 on x_S, zero padded to length p-1.
  Vector gamma_s;
  /// l1-operator norm of the Schur complement of Sigma_{S,S}.
  double schur_l1_norm = 0.0;
  /// schur_l1_norm * ||gamma0_{-S}||_inf.
  double v_bound = 0.0;
  /// Exact ||v^S_{-S}||_inf with v^S = Sigma_{-1,-1}(gamma0 - gamma_s).
  double v_exact = 0.0;
  bool bound_holds = false;
};

/// Throws SingularSubmatrix if Sigma_{S,S} is not positive definite.
ProjectionResult projection_pair(const CovarianceModel& model, const IndexSet& s);

/// ||v||_1 ||v||_inf / ||v||_2. Throws ZeroVector.
double sparsity_index(const Vector& v);

struct TopSResult {
  IndexSet support;
  EligiblePair candidate;
  double lambda_s = 0.0;
  double kappa = 0.0;
  /// The l1-operator norm constant C.
  double c_const = 0.0;
  double tail_l1 = 0.0;
  /// lambda_s * ||gamma0||_1.
  double non_sparsity_witness = 0.0;
  bool certified = false;
  std::string failure;
};

/// S = the s largest |gamma0_j| (lower index on ties), candidate
/// (gamma^S, kappa(gamma0_{-S}) / (C ||gamma0_{-S}||_1)).
TopSResult top_s_projection_pair(const CovarianceModel& model, Index s,
                                 double eps_eligible = 0.05);

struct ProjectSCheck {
  double lhs = 0.0;
  double bound = 0.0;
  bool applicable = false;
  bool holds = false;
};

/// |1/Theta11_sharp - E(x_1 - x_S gamma^S_S)^2| against
/// l1_product + s lambda^2 / lambda_min^2, where gamma^S is the projection
/// on the support S of gamma_sharp. Applicable when lambda sqrt(s) <= 0.1.
ProjectSCheck projects_bound(const CovarianceModel& model, const EligiblePair& pair,
                             const SharpDirection& direction);

/// E(x_1 - x_S c_S)^2 minimised over c_S: 1 - Sigma_{1,S} Sigma_{S,S}^{-1} Sigma_{S,1}.
double projection_residual_variance(const CovarianceModel& model, const IndexSet& s);

/// Nonzero coordinates of v.
IndexSet support_of(const Vector& v, double tol = 0.0);

}  // namespace dlasso
