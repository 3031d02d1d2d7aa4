#pragma once

#include <optional>

#include "dlasso/eligible_pairs.h"
#include "dlasso/gaussian_models.h"
#include "dlasso/lasso.h"
#include "dlasso/stats.h"

namespace dlasso {

/// Quantities only a simulation knows; enables the decomposition output.
struct SimulationTruth {
  Vector beta0;
  Vector eps;
};

struct DebiasOutput {
  double estimate = 0.0;
  double variance_proxy = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  /// Available in simulation mode: estimate - beta0_1 = linear_term + remainder.
  bool has_truth = false;
  double linear_term = 0.0;
  double remainder = 0.0;

  // Known-sigma estimator: per-half terms (i) and (ii).
  double term_i[2] = {0.0, 0.0};
  double term_ii[2] = {0.0, 0.0};
  double beta_error_l1[2] = {0.0, 0.0};
  /// Unknown-sigma estimator: ||e_1 - Sigma_hat Theta_hat||_inf and its KKT bound.
  double sup_residual = 0.0;
  double sup_residual_bound = 0.0;
  bool remainder_bound_ok = true;
  /// |estimate - beta0_1 - (linear_term + remainder)| with both terms computed directly.
  double decomposition_error = 0.0;

  double lambda = 0.0;
  double lambda_node = 0.0;
  Index n = 0;
  Vector gamma_hat;
  double node_denominator = 0.0;
};

struct DebiasOptions {
  double alpha = 0.05;
  LassoOptions lasso;
  /// Test hook: use beta0 in place of the pilot Lasso estimates.
  bool force_beta_hat_to_truth = false;
};

/// Sample-split estimator with the sharp direction. Throws OddSampleSize.
DebiasOutput debias_known_sigma(const MatrixRef& x, const VectorRef& y,
                                const CovarianceModel& model, const SharpDirection& direction,
                                double lambda,
                                const std::optional<SimulationTruth>& truth = std::nullopt,
                                const DebiasOptions& opts = {});

/// Node-wise estimator. Throws DegenerateDenominator.
DebiasOutput debias_unknown_sigma(const MatrixRef& x, const VectorRef& y, double lambda,
                                  double lambda_node,
                                  const std::optional<SimulationTruth>& truth = std::nullopt,
                                  const DebiasOptions& opts = {});

struct LinearityDiagnostic {
  /// sqrt(log p) * ||gamma_hat - gamma_sharp||_1.
  double rate = 0.0;
  bool condition_holds = false;
  /// |(Theta_hat - Theta_sharp)' X' eps / n|.
  double gap = 0.0;
  /// ||Theta_hat - Theta_sharp||_1 * ||X' eps / n||_inf.
  double gap_bound = 0.0;
  bool gap_bound_ok = true;
};

/// Compares the node-wise direction (1, -gamma_hat)/d_hat with the sharp
/// direction (1, -gamma_sharp)/d_sharp on the realised noise.
LinearityDiagnostic linearity_diagnostic(const MatrixRef& x, const VectorRef& eps,
                                         const Vector& gamma_hat, double d_hat,
                                         const Vector& gamma_sharp, double d_sharp,
                                         double threshold = 0.1);

/// E(x_1 - x_{-1} gamma_sharp)^2.
double sigma_sharp_sq(const CovarianceModel& model, const Vector& gamma_sharp);

/// Correlated-pair threshold at sample size n with sigma_sharp from the
/// model; union bound over p-1 coordinates unless disabled.
double lambda_eps_sharp(const CovarianceModel& model, const EligiblePair& pair, double t,
                        Index n, bool union_bound = true);

}  // namespace dlasso
