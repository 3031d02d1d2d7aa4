#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "dlasso/eligible_pairs.h"
#include "dlasso/gaussian_models.h"

namespace dlasso {

struct ConstructionOptions {
  /// Floor for every "bounded away from zero" condition.
  double margin = 0.1;
  double eps_eligible = 0.05;
  /// Cap on lambda_sharp * sqrt(|S|).
  double sparse_cap = 0.1;
};

/// Construction-specific quantities, kept as named scalars plus vectors.
struct Witness {
  std::map<std::string, double> scalars;
  std::map<std::string, Vector> vectors;
};

struct ConstructionOutput {
  CovarianceModel model;
  EligiblePair pair;
  SharpDirection direction;
  Witness witness;
};

struct RegressionOptions : ConstructionOptions {
  /// Test hook: replaces the Gaussian noise by zero.
  bool zero_noise = false;
};

/// gamma0 = least squares of Z_1 = Z_{-1} gamma_sharp + xi on a deterministic
/// Z_{-1} with Z_{-1}'Z_{-1}/N = sigma_minus; lambda_sharp from the
/// inner-product tail bound at level t with a union bound over 2(p-1) events.
ConstructionOutput construct_regression(const Matrix& sigma_minus, const Vector& gamma_sharp,
                                        Index big_n, std::uint64_t seed, double t,
                                        const RegressionOptions& opts = {});

/// gamma0 = gamma_sharp + lambda_sharp * sigma_minus^{-1} z.
ConstructionOutput construct_direct(const Matrix& sigma_minus, const Vector& z,
                                    const Vector& gamma_sharp, double lambda_sharp,
                                    const ConstructionOptions& opts = {});

/// gamma0_S given, gamma0_{-S} = lambda_sharp * A_{-S,-S}^{-1} z_{-S},
/// gamma_sharp = gamma0_S zero padded.
ConstructionOutput construct_reversed_irrepresentable(const Matrix& sigma_minus,
                                                      const IndexSet& s, const Vector& z_minus_s,
                                                      const Vector& gamma0_s,
                                                      double lambda_sharp,
                                                      const ConstructionOptions& opts = {});

/// ||A_{S,-S} A_{-S,-S}^{-1} z_{-S}||_inf.
double reversed_irrepresentable_value(const Matrix& sigma_minus, const IndexSet& s,
                                      const Vector& z_minus_s);

/// gamma0 = gamma_sharp + c0 where c0 minimises ||A^{1/2} c||_2 subject to
/// (A c)_S = 0 and lambda_sharp ||(W c)_{-S}||_1 = 1.
ConstructionOutput construct_lagrangian(const Matrix& sigma_minus, const IndexSet& s,
                                        const Vector& weights, const Vector& gamma_sharp,
                                        double lambda_sharp,
                                        const ConstructionOptions& opts = {});

/// zeta' W A^{-1} W zeta at the sign fixed point used by construct_lagrangian.
double lagrangian_q(const Matrix& sigma_minus, const IndexSet& s, const Vector& weights);

}  // namespace dlasso
