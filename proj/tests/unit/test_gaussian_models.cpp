#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "dlasso/error.h"
#include "dlasso/gaussian_models.h"

using namespace dlasso;

namespace {

Matrix equicorrelation(Index p, double rho) {
  Matrix s = Matrix::Constant(p, p, rho);
  s.diagonal().setOnes();
  return s;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no exception";
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST(BuildModel, Identity) {
  const CovarianceModel m = build_model(Matrix::Identity(3, 3));
  EXPECT_EQ(m.gamma0, Vector::Zero(2));
  EXPECT_DOUBLE_EQ(m.theta11, 1.0);
  EXPECT_DOUBLE_EQ(m.lambda_min_sq, 1.0);
}

TEST(BuildModel, EquicorrelationMatchesDenseInverse) {
  // (Sigma^{-1})_{11} for rho = 0.5, p = 3 from an independent dense inverse.
  const CovarianceModel m = build_model(equicorrelation(3, 0.5));
  EXPECT_NEAR(m.theta11, 1.5, 1e-14);
  EXPECT_NEAR(m.theta11, equicorrelation(3, 0.5).inverse()(0, 0), 1e-13);
  EXPECT_NEAR(m.lambda_min_sq, 0.5, 1e-14);
  const Vector t1 = m.theta1();
  const Vector ref = equicorrelation(3, 0.5).inverse().col(0);
  EXPECT_LT((t1 - ref).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(BuildModel, RejectsInvalidMatrices) {
  Matrix s = Matrix::Constant(3, 3, 1.01);
  s.diagonal().setOnes();
  EXPECT_EQ(code_of([&] { build_model(s); }), ErrorCode::kNotPositiveDefinite);
  Matrix ns = Matrix::Identity(3, 3);
  ns(0, 1) = 0.2;
  EXPECT_EQ(code_of([&] { build_model(ns); }), ErrorCode::kNotSymmetric);
  Matrix nd = Matrix::Identity(3, 3) * 2.0;
  EXPECT_EQ(code_of([&] { build_model(nd); }), ErrorCode::kNotUnitDiagonal);
  EXPECT_EQ(code_of([&] { build_model(Matrix::Identity(1, 1)); }), ErrorCode::kInvalidArgument);
}

TEST(AugmentedSigma, SubstitutesGamma0) {
  Vector g(2);
  g << 0.5, 0.0;
  const CovarianceModel m = augmented_sigma(Matrix::Identity(2, 2), g);
  EXPECT_DOUBLE_EQ(m.sigma(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(m.sigma(0, 2), 0.0);
  EXPECT_GT(m.lambda_min_sq, 0.0);
  EXPECT_LT((m.gamma0 - g).norm(), 1e-14);
}

TEST(AugmentedSigma, RejectsNotAllowed) {
  EXPECT_EQ(code_of([] { augmented_sigma(Matrix::Identity(2, 2), Vector::Ones(2)); }),
            ErrorCode::kNotAllowed);
}

TEST(AugmentedSigma, LambdaOnesIsAllowed) {
  const Index p = 101;
  const double lambda = std::sqrt(0.5 / (p - 1));
  const CovarianceModel m =
      augmented_sigma(Matrix::Identity(p - 1, p - 1), Vector::Constant(p - 1, lambda));
  Eigen::SelfAdjointEigenSolver<Matrix> es(m.sigma);
  EXPECT_NEAR(m.lambda_min_sq, es.eigenvalues().minCoeff(), 1e-12);
  // Eigenvalues of [[1, v'], [v, I]] are 1 +- ||v||.
  EXPECT_NEAR(es.eigenvalues().minCoeff(), 1.0 - std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(m.theta11, 2.0, 1e-12);
}

TEST(IsAllowed, ZeroAndSupNormCap) {
  const Matrix a = equicorrelation(4, 0.3);
  const AllowedReport r = is_allowed(a, Vector::Zero(4), 0.5);
  EXPECT_TRUE(r.allowed);
  EXPECT_TRUE(is_allowed(a, Vector::Zero(4), min_eigenvalue(a)).allowed);
  Vector g = Vector::Zero(4);
  g(0) = 1.2;
  const Matrix id = Matrix::Identity(4, 4);
  const AllowedReport bad = is_allowed(id, g, 1e-12);
  EXPECT_FALSE(bad.allowed);
  EXPECT_DOUBLE_EQ(bad.linf, 1.2);
}

TEST(Sample, DeterministicGivenSeed) {
  const CovarianceModel m = build_model(equicorrelation(5, 0.3));
  const Vector beta = Vector::LinSpaced(5, 1.0, 2.0);
  const DesignSample a = sample(m, 50, beta, 11);
  const DesignSample b = sample(m, 50, beta, 11);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.y, b.y);
  const DesignSample c = sample(m, 50, beta, 12);
  EXPECT_NE(a.x, c.x);
}

TEST(Sample, ZeroBetaGivesNoiseResponse) {
  const CovarianceModel m = build_model(equicorrelation(4, 0.2));
  const DesignSample s = sample(m, 20, Vector::Zero(4), 5);
  EXPECT_EQ(s.y, s.eps);
}

TEST(Sample, CovarianceLawOfLargeNumbers) {
  const CovarianceModel id = build_model(Matrix::Identity(4, 4));
  const DesignSample s = sample(id, 100000, Vector::Zero(4), 17);
  const Matrix cov = s.x.transpose() * s.x / 1e5;
  EXPECT_LT((cov - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 0.05);

  Vector g(3);
  g << 0.3, -0.2, 0.1;
  const CovarianceModel m = augmented_sigma(equicorrelation(3, 0.4), g);
  const DesignSample t = sample(m, 100000, Vector::Zero(4), 19);
  const Matrix cov2 = t.x.transpose() * t.x / 1e5;
  EXPECT_LT((cov2 - m.sigma).cwiseAbs().maxCoeff(), 0.05);
}
