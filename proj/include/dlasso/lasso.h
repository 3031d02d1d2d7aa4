#pragma once

#include "dlasso/gaussian_models.h"
#include "dlasso/types.h"

namespace dlasso {

struct LassoOptions {
  double tol = 1e-10;
  double kkt_tol = 1e-8;
  int max_iters = 100000;
  /// Warm start; empty means zero.
  Vector init;
};

struct LassoFit {
  Vector coef;
  double lambda = 0.0;
  double objective = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Count of all-zero columns (their coefficient stays at zero).
  int degenerate_columns = 0;
  /// False if an objective increase above round-off was seen between sweeps.
  bool objective_monotone = true;
};

/// argmin_b ||y - X b||_2^2 / n + 2 lambda ||b||_1.
LassoFit lasso(const MatrixRef& x, const VectorRef& y, double lambda,
               const LassoOptions& opts = {});

/// argmin_c c'Qc - 2 q'c + 2 lambda ||c||_1 (Q symmetric PSD); the generic
/// quadratic form behind the population Lasso.
LassoFit quadratic_lasso(const Matrix& q_mat, const Vector& q_vec, double lambda,
                         const LassoOptions& opts = {});

/// argmin_c 1 - 2 Sigma_{1,-1} c + c' Sigma_{-1,-1} c + 2 lambda ||c||_1.
/// The reported objective includes the constant 1.
LassoFit population_lasso(const CovarianceModel& model, double lambda,
                          const LassoOptions& opts = {});

struct NodewiseFit {
  LassoFit fit;
  /// ||X_1 - X_{-1} gamma_hat||_2^2 / n.
  double residual_sq = 0.0;
  double l1_norm = 0.0;
};

/// Lasso of column 0 of x on the remaining columns.
NodewiseFit nodewise_lasso(const MatrixRef& x, double lambda, const LassoOptions& opts = {});

/// Value of ||y - Xb||^2/n + 2 lambda ||b||_1.
double lasso_objective(const MatrixRef& x, const VectorRef& y, const Vector& b, double lambda);

/// max_j violation of the subgradient condition for gradient g = X'(y-Xb)/n.
double kkt_residual(const Vector& gradient, const Vector& b, double lambda);

/// c * sqrt(log p / n).
double default_lambda(Index p, Index n, double c = 1.1);

struct SlowRateCertificate {
  /// (gamma_hat - gamma_sharp)' Sigma_hat (gamma_hat - gamma_sharp)
  /// + (lambda_L - lambda_eps) ||gamma_hat||_1.
  double lhs_a = 0.0;
  /// (lambda_L + lambda_eps) ||gamma_sharp||_1.
  double rhs_a = 0.0;
  double lhs_b = 0.0;
  double rhs_b = 0.0;
  /// ||X_{-1}' eps_sharp||_inf / n with eps_sharp = X_1 - X_{-1} gamma_sharp.
  double noise_sup = 0.0;
  bool event_c = false;
  bool ineq_a = false;
  bool ineq_b = false;
  /// Allowance for the optimization tolerance of the fit.
  double slack = 0.0;
};

/// Evaluates the slow-rate inequalities for a node-wise fit on `x`.
/// Throws HypothesisViolated when lambda_node < 2 lambda_eps_sharp.
SlowRateCertificate slow_rate_certificate(const MatrixRef& x, const LassoFit& fit,
                                          const Vector& gamma_sharp, double lambda_eps_sharp,
                                          double lambda_node, double kkt_tol = 1e-8);

}  // namespace dlasso
