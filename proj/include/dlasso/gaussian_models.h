#pragma once

#include <cstdint>

#include "dlasso/types.h"

namespace dlasso {

/// Population design with unit-diagonal covariance and its derived
/// quantities for the first coordinate. Immutable after construction.
struct CovarianceModel {
  Index p = 0;
  Matrix sigma;
  /// Projection coefficients of x_1 on x_{-1}; length p-1.
  Vector gamma0;
  /// (Sigma^{-1})_{11}.
  double theta11 = 0.0;
  /// Smallest eigenvalue of sigma.
  double lambda_min_sq = 0.0;
  /// Largest eigenvalue of sigma (diagnostic only).
  double lambda_max_sq = 0.0;
  /// Lower Cholesky factor of Sigma_{-1,-1}.
  Matrix chol_minus;
  bool minus_is_identity = false;

  auto sigma_minus() const { return sigma.bottomRightCorner(p - 1, p - 1); }
  auto sigma_minus_one() const { return sigma.col(0).tail(p - 1); }
  /// Theta_1 = Theta_11 * (1, -gamma0).
  Vector theta1() const;
};

/// Validates `sigma` (square, p >= 2, finite, symmetric, unit diagonal,
/// positive definite) and derives gamma0, theta11 and the eigenvalue range.
CovarianceModel build_model(const Matrix& sigma);

/// Sigma(gamma0) = [[1, gamma0' A], [A gamma0, A]] with A = sigma_minus.
/// Throws NotAllowed unless `is_allowed(sigma_minus, gamma0, margin)` holds.
CovarianceModel augmented_sigma(const Matrix& sigma_minus, const Vector& gamma0,
                                double margin = 1e-12);

struct AllowedReport {
  bool allowed = false;
  /// Exact smallest eigenvalue of Sigma(gamma0).
  double lambda_min_sq = 0.0;
  /// ||A gamma0||_inf.
  double linf = 0.0;
  /// 1 - gamma0' A gamma0 (sufficient condition when >= margin).
  double sufficient_margin = 0.0;
  /// (1 - ||A^{1/2} gamma0||_2) * lambda_min(A), a lower bound on lambda_min_sq.
  double lower_bound = 0.0;
};

AllowedReport is_allowed(const Matrix& sigma_minus, const Vector& gamma0, double margin);

struct DesignSample {
  Index n = 0;
  Matrix x;
  Vector y;
  Vector beta0;
  Vector eps;
  std::uint64_t seed = 0;
};

/// Draws n i.i.d. rows from N(0, sigma) and unit-variance noise.
/// Deterministic given `seed`.
DesignSample sample(const CovarianceModel& model, Index n, const Vector& beta0,
                    std::uint64_t seed);

/// Symmetry / unit diagonal / positive-definiteness checks shared by the
/// builders; throws on the first failure.
void validate_correlation_matrix(const Matrix& sigma);

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Matrix& a);

}  // namespace dlasso
