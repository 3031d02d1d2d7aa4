#include "dlasso/gaussian_models.h"

#include <cmath>
#include <random>

#include "dlasso/error.h"
#include "dlasso/stats.h"

namespace dlasso {

namespace {

constexpr double kStructureTol = 1e-12;
constexpr double kPdTol = 1e-12;

bool is_identity(const Matrix& a) {
  return a.isIdentity(0.0);
}

}  // namespace

Vector CovarianceModel::theta1() const {
  Vector t(p);
  t(0) = 1.0;
  t.tail(p - 1) = -gamma0;
  return theta11 * t;
}

double min_eigenvalue(const Matrix& a) {
  if (is_identity(a)) return 1.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::kNotPositiveDefinite, "eigenvalue computation failed");
  }
  return es.eigenvalues()(0);
}

void validate_correlation_matrix(const Matrix& sigma) {
  if (sigma.rows() != sigma.cols()) {
    throw Error(ErrorCode::kInvalidArgument, "covariance matrix is not square");
  }
  if (sigma.rows() < 1) throw Error(ErrorCode::kInvalidArgument, "empty covariance matrix");
  if (!sigma.allFinite()) throw Error(ErrorCode::kInvalidArgument, "non-finite covariance entry");
  const double asym = (sigma - sigma.transpose()).cwiseAbs().maxCoeff();
  if (asym > kStructureTol) throw Error(ErrorCode::kNotSymmetric, "matrix is not symmetric", asym);
  const double diag = (sigma.diagonal().array() - 1.0).abs().maxCoeff();
  if (diag > kStructureTol) {
    throw Error(ErrorCode::kNotUnitDiagonal, "diagonal entries must equal 1", diag);
  }
}

CovarianceModel build_model(const Matrix& sigma) {
  validate_correlation_matrix(sigma);
  const Index p = sigma.rows();
  if (p < 2) throw Error(ErrorCode::kInvalidArgument, "dimension must be at least 2");

  double lmin = 1.0;
  double lmax = 1.0;
  if (!is_identity(sigma)) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(sigma, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
      throw Error(ErrorCode::kNotPositiveDefinite, "eigenvalue computation failed");
    }
    lmin = es.eigenvalues()(0);
    lmax = es.eigenvalues()(p - 1);
  }
  if (!(lmin > kPdTol)) {
    throw Error(ErrorCode::kNotPositiveDefinite, "smallest eigenvalue not above 1e-12", lmin);
  }

  CovarianceModel m;
  m.p = p;
  m.sigma = sigma;
  m.lambda_min_sq = lmin;
  m.lambda_max_sq = lmax;
  const Matrix a = sigma.bottomRightCorner(p - 1, p - 1);
  m.minus_is_identity = is_identity(a);
  if (m.minus_is_identity) {
    m.chol_minus = Matrix::Identity(p - 1, p - 1);
    m.gamma0 = sigma.col(0).tail(p - 1);
  } else {
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorCode::kCholeskyFailure, "Cholesky of Sigma_{-1,-1} failed");
    }
    m.chol_minus = llt.matrixL();
    m.gamma0 = llt.solve(Vector(sigma.col(0).tail(p - 1)));
  }
  const double resid_var = 1.0 - sigma.col(0).tail(p - 1).dot(m.gamma0);
  if (!(resid_var > kPdTol)) {
    throw Error(ErrorCode::kNotPositiveDefinite, "residual variance of x_1 not positive",
                resid_var);
  }
  m.theta11 = 1.0 / resid_var;
  return m;
}

AllowedReport is_allowed(const Matrix& sigma_minus, const Vector& gamma0, double margin) {
  if (sigma_minus.rows() != sigma_minus.cols() || sigma_minus.rows() != gamma0.size()) {
    throw Error(ErrorCode::kInvalidArgument, "inconsistent shapes in is_allowed");
  }
  AllowedReport r;
  const Vector ag = sigma_minus * gamma0;
  r.linf = ag.size() > 0 ? ag.cwiseAbs().maxCoeff() : 0.0;
  const double quad = gamma0.dot(ag);
  r.sufficient_margin = 1.0 - quad;
  const double lmin_a = min_eigenvalue(sigma_minus);
  r.lower_bound = (1.0 - std::sqrt(std::max(quad, 0.0))) * lmin_a;

  const Index p = sigma_minus.rows() + 1;
  Matrix full(p, p);
  full(0, 0) = 1.0;
  full.col(0).tail(p - 1) = ag;
  full.row(0).tail(p - 1) = ag.transpose();
  full.bottomRightCorner(p - 1, p - 1) = sigma_minus;
  r.lambda_min_sq = min_eigenvalue(full);
  r.allowed = r.lambda_min_sq >= margin && r.linf <= 1.0;
  return r;
}

CovarianceModel augmented_sigma(const Matrix& sigma_minus, const Vector& gamma0, double margin) {
  validate_correlation_matrix(sigma_minus);
  if (sigma_minus.rows() != gamma0.size()) {
    throw Error(ErrorCode::kInvalidArgument, "gamma0 length does not match sigma_minus");
  }
  const Index p = sigma_minus.rows() + 1;
  const Vector ag = sigma_minus * gamma0;
  const double linf = ag.size() ? ag.cwiseAbs().maxCoeff() : 0.0;
  if (linf > 1.0) {
    throw Error(ErrorCode::kNotAllowed, "||Sigma_{-1,-1} gamma0||_inf exceeds 1", linf);
  }
  Matrix full(p, p);
  full(0, 0) = 1.0;
  full.col(0).tail(p - 1) = ag;
  full.row(0).tail(p - 1) = ag.transpose();
  full.bottomRightCorner(p - 1, p - 1) = sigma_minus;
  CovarianceModel model;
  try {
    model = build_model(full);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNotPositiveDefinite) throw;
    throw Error(ErrorCode::kNotAllowed, "Sigma(gamma0) is not positive definite", e.value());
  }
  if (model.lambda_min_sq < margin) {
    throw Error(ErrorCode::kNotAllowed, "lambda_min^2 of Sigma(gamma0) below margin",
                model.lambda_min_sq);
  }
  return model;
}

DesignSample sample(const CovarianceModel& model, Index n, const Vector& beta0,
                    std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "sample size must be positive");
  if (beta0.size() != model.p) throw Error(ErrorCode::kInvalidArgument, "beta0 has wrong length");
  const Index p = model.p;
  std::mt19937_64 rng(seed);

  DesignSample s;
  s.n = n;
  s.seed = seed;
  s.beta0 = beta0;
  s.x.resize(n, p);

  // x_{-1} = Z L' has covariance A; x_1 = x_{-1} gamma0 + e / sqrt(theta11)
  // reproduces the first row and column of sigma exactly.
  Matrix z(n, p - 1);
  fill_normal(z, rng);
  Vector e(n);
  fill_normal(e, rng);
  s.eps.resize(n);
  fill_normal(s.eps, rng);

  if (model.minus_is_identity) {
    s.x.rightCols(p - 1) = z;
  } else {
    s.x.rightCols(p - 1).noalias() = z * model.chol_minus.transpose();
  }
  s.x.col(0).noalias() = s.x.rightCols(p - 1) * model.gamma0;
  s.x.col(0) += e * std::sqrt(1.0 / model.theta11);
  s.y.noalias() = s.x * beta0;
  s.y += s.eps;
  return s;
}

}  // namespace dlasso
