#include "dlasso/constructions.h"

#include <cmath>
#include <limits>
#include <random>

#include "dlasso/error.h"
#include "dlasso/stats.h"
#include "dlasso/tail_bounds.h"

namespace dlasso {

namespace {

Eigen::LLT<Matrix> factor(const Matrix& a) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kNotPositiveDefinite, "sigma_minus is not positive definite");
  }
  return llt;
}

void require_margin(bool ok, const std::string& what, double value) {
  if (!ok) throw Error(ErrorCode::kMarginViolated, what, value);
}

void check_sparse_cap(const Vector& gamma_sharp, double lambda, const ConstructionOptions& opts,
                      Witness& w) {
  const double s = static_cast<double>(support_of(gamma_sharp).size());
  const double cap = lambda * std::sqrt(s);
  w.scalars["lambda_sqrt_s"] = cap;
  require_margin(cap <= opts.sparse_cap, "lambda_sharp * sqrt(|S|) exceeds the sparsity cap", cap);
}

ConstructionOutput finish(CovarianceModel model, const Vector& gamma_sharp, double lambda,
                          const ConstructionOptions& opts, Witness witness, bool require_strict) {
  ConstructionOutput out;
  out.pair = certify_pair(model, gamma_sharp, lambda, opts.eps_eligible);
  out.direction = sharp_direction(model, out.pair);
  const Vector delta = model.gamma0 - gamma_sharp;
  const double quad = delta.dot(model.sigma_minus() * delta);
  witness.scalars["quadratic_improvement"] = quad;
  witness.scalars["theta11"] = model.theta11;
  witness.scalars["theta11_sharp"] = out.direction.theta11_sharp;
  witness.scalars["improvement"] = out.direction.improvement;
  witness.scalars["lambda_min_sq"] = model.lambda_min_sq;
  witness.scalars["nonsparsity_witness"] = lambda * model.gamma0.lpNorm<1>();
  if (require_strict && !(out.direction.improvement > 0.0)) {
    throw Error(ErrorCode::kCertificationFailed, "no strict variance improvement",
                out.direction.improvement);
  }
  if (!out.direction.all_ok()) {
    throw Error(ErrorCode::kCertificationFailed, "sharp-direction finite-sample checks failed");
  }
  out.model = std::move(model);
  out.witness = std::move(witness);
  return out;
}

Vector index_vector(const IndexSet& s) {
  Vector v(static_cast<Index>(s.size()));
  for (size_t i = 0; i < s.size(); ++i) v(static_cast<Index>(i)) = static_cast<double>(s[i]);
  return v;
}

void check_index_set(const IndexSet& s, Index m) {
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] < 0 || s[i] >= m) throw Error(ErrorCode::kInvalidArgument, "index outside 0..p-2");
    if (i > 0 && s[i] <= s[i - 1]) {
      throw Error(ErrorCode::kInvalidArgument, "index set must be strictly increasing");
    }
  }
}

struct LagrangianSigns {
  Vector zeta;
  Vector g;
  int iterations = 0;
  double margin = 0.0;
  bool stable = false;
};

// Fixed point zeta = sign((A^{-1} W zeta)_{-S}) from zeta = 1 on -S; each
// step does not decrease zeta' W A^{-1} W zeta.
LagrangianSigns lagrangian_signs(const Eigen::LLT<Matrix>& llt, const IndexSet& rest,
                                 const Vector& weights) {
  const Index m = weights.size();
  LagrangianSigns out;
  out.zeta = Vector::Zero(m);
  for (Index j : rest) out.zeta(j) = 1.0;
  constexpr int kMaxSteps = 1000;
  int steps = 0;
  for (; steps < kMaxSteps; ++steps) {
    out.g = llt.solve(weights.cwiseProduct(out.zeta));
    bool changed = false;
    for (Index j : rest) {
      const double sj = out.g(j) > 0.0 ? 1.0 : (out.g(j) < 0.0 ? -1.0 : 0.0);
      if (sj != 0.0 && sj != out.zeta(j)) {
        out.zeta(j) = sj;
        changed = true;
      }
    }
    if (!changed) break;
  }
  double gmax = 0.0;
  double gmin = std::numeric_limits<double>::infinity();
  for (Index j : rest) {
    gmax = std::max(gmax, std::abs(out.g(j)));
    gmin = std::min(gmin, std::abs(out.g(j)));
  }
  out.iterations = steps;
  out.margin = gmax > 0.0 ? gmin / gmax : 0.0;
  out.stable = steps < kMaxSteps && gmin > 1e-8 * gmax;
  return out;
}

}  // namespace

double lagrangian_q(const Matrix& sigma_minus, const IndexSet& s, const Vector& weights) {
  const IndexSet rest = complement(s, sigma_minus.rows());
  const LagrangianSigns signs = lagrangian_signs(factor(sigma_minus), rest, weights);
  return weights.cwiseProduct(signs.zeta).dot(signs.g);
}

ConstructionOutput construct_regression(const Matrix& sigma_minus, const Vector& gamma_sharp,
                                        Index big_n, std::uint64_t seed, double t,
                                        const RegressionOptions& opts) {
  validate_correlation_matrix(sigma_minus);
  const Index m = sigma_minus.rows();
  const Index p = m + 1;
  if (gamma_sharp.size() != m) throw Error(ErrorCode::kInvalidArgument, "gamma_sharp length");
  if (big_n <= p) throw Error(ErrorCode::kInvalidArgument, "N must exceed p", double(big_n));
  if (!(t > 0.0)) throw Error(ErrorCode::kInvalidArgument, "t must be positive", t);

  const auto llt = factor(sigma_minus);
  const Matrix l = llt.matrixL();
  const double root_n = std::sqrt(static_cast<double>(big_n));

  // Z_{-1} = [sqrt(N) L' ; 0] so that Z_{-1}'Z_{-1}/N = sigma_minus.
  Vector xi(big_n);
  if (opts.zero_noise) {
    xi.setZero();
  } else {
    std::mt19937_64 rng(seed);
    fill_normal(xi, rng);
  }
  const Vector xi_top = xi.head(m);
  // Least squares: gamma0 = gamma_sharp + (N A)^{-1} Z_{-1}' xi = gamma_sharp + L^{-T} xi_top / sqrt(N).
  const Vector shift = l.transpose().triangularView<Eigen::Upper>().solve(xi_top) / root_n;
  const Vector gamma0 = gamma_sharp + shift;

  const double t_union = union_bound_t(t, 2.0 * static_cast<double>(m));
  const double lambda = inner_product_tail(static_cast<double>(big_n), t_union);

  Witness w;
  w.scalars["N"] = static_cast<double>(big_n);
  w.scalars["t"] = t;
  w.scalars["t_union"] = t_union;
  w.scalars["lambda_sharp"] = lambda;
  w.scalars["chi_square_over_n"] = xi_top.squaredNorm() / static_cast<double>(big_n);
  w.scalars["seed"] = static_cast<double>(seed);
  const Vector sup = l * xi_top / root_n;
  w.scalars["noise_sup"] = sup.size() ? sup.cwiseAbs().maxCoeff() : 0.0;

  CovarianceModel model;
  try {
    model = augmented_sigma(sigma_minus, gamma0, opts.margin);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNotAllowed) throw;
    throw Error(ErrorCode::kCertificationFailed,
                std::string("drawn gamma0 is not allowed: ") + e.what(), e.value());
  }
  try {
    return finish(std::move(model), gamma_sharp, lambda, opts, std::move(w), !opts.zero_noise);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kCertificationFailed) throw;
    if (!is_certification_error(e.code())) throw;
    throw Error(ErrorCode::kCertificationFailed,
                std::string("pair not eligible at this seed: ") + e.what(), e.value());
  }
}

ConstructionOutput construct_direct(const Matrix& sigma_minus, const Vector& z,
                                    const Vector& gamma_sharp, double lambda_sharp,
                                    const ConstructionOptions& opts) {
  validate_correlation_matrix(sigma_minus);
  const Index m = sigma_minus.rows();
  if (z.size() != m || gamma_sharp.size() != m) {
    throw Error(ErrorCode::kInvalidArgument, "z and gamma_sharp must have length p-1");
  }
  if (!(lambda_sharp > 0.0)) throw Error(ErrorCode::kInvalidArgument, "lambda_sharp must be > 0");
  const double zinf = z.size() ? z.cwiseAbs().maxCoeff() : 0.0;
  if (zinf > 1.0) throw Error(ErrorCode::kInfNormViolated, "||z||_inf exceeds 1", zinf);

  Witness w;
  w.scalars["lambda_sharp"] = lambda_sharp;
  w.vectors["z"] = z;
  check_sparse_cap(gamma_sharp, lambda_sharp, opts, w);

  const bool identity = sigma_minus.isIdentity(0.0);
  const double lmin_a = min_eigenvalue(sigma_minus);
  const double ceiling = lambda_sharp * lambda_sharp * static_cast<double>(m) / lmin_a;
  w.scalars["improvement_ceiling"] = ceiling;
  if (ceiling < opts.margin) {
    throw Error(ErrorCode::kNotHighDimensional,
                "(p-1) lambda^2 / lambda_min(A) is below the margin: no improvement of that "
                "size is possible unless p > 1/lambda^2",
                ceiling);
  }

  Vector ainv_z;
  if (identity) {
    ainv_z = z;
  } else {
    ainv_z = factor(sigma_minus).solve(z);
  }
  const double q = lambda_sharp * lambda_sharp * z.dot(ainv_z);
  const double gs_quad = gamma_sharp.dot(sigma_minus * gamma_sharp);
  w.scalars["q"] = q;
  require_margin(q >= opts.margin, "lambda^2 ||A^{-1/2} z||^2 below the margin", q);
  require_margin(1.0 - q >= opts.margin, "1 - lambda^2 ||A^{-1/2} z||^2 below the margin", 1 - q);
  require_margin(1.0 - q - gs_quad >= opts.margin,
                 "1 - lambda^2 ||A^{-1/2} z||^2 - ||A^{1/2} gamma_sharp||^2 below the margin",
                 1.0 - q - gs_quad);

  const Vector gamma0 = gamma_sharp + lambda_sharp * ainv_z;
  CovarianceModel model = augmented_sigma(sigma_minus, gamma0, opts.margin);
  ConstructionOutput out = finish(std::move(model), gamma_sharp, lambda_sharp, opts, w, true);
  const double wit = out.witness.scalars["nonsparsity_witness"];
  if (wit < q * (1.0 - 1e-9)) {
    throw Error(ErrorCode::kCertificationFailed, "non-sparsity witness below lambda^2 z'A^{-1}z",
                wit);
  }
  return out;
}

double reversed_irrepresentable_value(const Matrix& sigma_minus, const IndexSet& s,
                                      const Vector& z_minus_s) {
  const Index m = sigma_minus.rows();
  const IndexSet rest = complement(s, m);
  if (static_cast<Index>(rest.size()) != z_minus_s.size()) {
    throw Error(ErrorCode::kInvalidArgument, "z_{-S} has the wrong length");
  }
  if (s.empty()) return 0.0;
  const Vector u = factor(submatrix(sigma_minus, rest, rest)).solve(z_minus_s);
  return (submatrix(sigma_minus, s, rest) * u).cwiseAbs().maxCoeff();
}

ConstructionOutput construct_reversed_irrepresentable(const Matrix& sigma_minus,
                                                      const IndexSet& s, const Vector& z_minus_s,
                                                      const Vector& gamma0_s,
                                                      double lambda_sharp,
                                                      const ConstructionOptions& opts) {
  validate_correlation_matrix(sigma_minus);
  const Index m = sigma_minus.rows();
  check_index_set(s, m);
  const IndexSet rest = complement(s, m);
  if (static_cast<Index>(s.size()) != gamma0_s.size()) {
    throw Error(ErrorCode::kInvalidArgument, "gamma0_S has the wrong length");
  }
  if (rest.empty()) throw Error(ErrorCode::kInvalidArgument, "S must be a proper subset");
  if (!(lambda_sharp > 0.0)) throw Error(ErrorCode::kInvalidArgument, "lambda_sharp must be > 0");
  const double zinf = z_minus_s.size() ? z_minus_s.cwiseAbs().maxCoeff() : 0.0;
  if (static_cast<Index>(rest.size()) != z_minus_s.size()) {
    throw Error(ErrorCode::kInvalidArgument, "z_{-S} has the wrong length");
  }
  if (zinf > 1.0) throw Error(ErrorCode::kInfNormViolated, "||z_{-S}||_inf exceeds 1", zinf);

  Witness w;
  w.scalars["lambda_sharp"] = lambda_sharp;
  w.vectors["S"] = index_vector(s);
  w.vectors["z_minus_s"] = z_minus_s;

  const double irrep = reversed_irrepresentable_value(sigma_minus, s, z_minus_s);
  w.scalars["irrepresentable_value"] = irrep;
  if (irrep > 1.0) {
    throw Error(ErrorCode::kIrrepresentableViolated,
                "||A_{S,-S} A_{-S,-S}^{-1} z_{-S}||_inf exceeds 1", irrep);
  }

  Vector gamma_sharp = Vector::Zero(m);
  for (size_t i = 0; i < s.size(); ++i) gamma_sharp(s[i]) = gamma0_s(static_cast<Index>(i));
  check_sparse_cap(gamma_sharp, lambda_sharp, opts, w);

  Vector z_full = Vector::Zero(m);
  for (size_t i = 0; i < rest.size(); ++i) z_full(rest[i]) = z_minus_s(static_cast<Index>(i));
  const double q_full = lambda_sharp * lambda_sharp * z_full.dot(factor(sigma_minus).solve(z_full));
  const double gs_quad = gamma_sharp.dot(sigma_minus * gamma_sharp);
  w.scalars["q"] = q_full;
  require_margin(q_full >= opts.margin, "lambda^2 ||A^{-1/2} z_{-S}||^2 below the margin", q_full);
  require_margin(1.0 - q_full >= opts.margin,
                 "1 - lambda^2 ||A^{-1/2} z_{-S}||^2 below the margin", 1.0 - q_full);
  require_margin(1.0 - q_full - gs_quad >= opts.margin,
                 "1 - lambda^2 ||A^{-1/2} z_{-S}||^2 - ||A^{1/2} gamma0_S||^2 below the margin",
                 1.0 - q_full - gs_quad);

  const Vector u = factor(submatrix(sigma_minus, rest, rest)).solve(z_minus_s);
  Vector gamma0 = gamma_sharp;
  for (size_t i = 0; i < rest.size(); ++i) {
    gamma0(rest[i]) = lambda_sharp * u(static_cast<Index>(i));
  }
  const double exact = lambda_sharp * lambda_sharp * z_minus_s.dot(u);
  w.scalars["exact_quadratic_improvement"] = exact;

  CovarianceModel model = augmented_sigma(sigma_minus, gamma0, opts.margin);
  ConstructionOutput out = finish(std::move(model), gamma_sharp, lambda_sharp, opts, w, true);

  const double quad = out.witness.scalars["quadratic_improvement"];
  if (std::abs(quad - exact) > 1e-9 * (1.0 + exact)) {
    throw Error(ErrorCode::kCertificationFailed, "quadratic improvement mismatch", quad - exact);
  }
  // 1/Theta11_sharp - 1/Theta11 equals the quadratic improvement up to a
  // cross term bounded by the l1 product.
  const double gap = out.direction.denominator - 1.0 / out.model.theta11;
  out.witness.scalars["inverse_variance_gap"] = gap;
  if (std::abs(gap - exact) > out.pair.l1_product + 1e-12) {
    throw Error(ErrorCode::kCertificationFailed, "cross-term bound violated", gap - exact);
  }
  const Vector zhat = out.model.sigma_minus() * (out.model.gamma0 - gamma_sharp) / lambda_sharp;
  const double zhat_inf = zhat.cwiseAbs().maxCoeff();
  out.witness.vectors["z_hat"] = zhat;
  out.witness.scalars["z_hat_inf"] = zhat_inf;
  if (zhat_inf > 1.0 + 1e-9) {
    throw Error(ErrorCode::kCertificationFailed, "converse check: ||z_hat||_inf exceeds 1",
                zhat_inf);
  }
  return out;
}

ConstructionOutput construct_lagrangian(const Matrix& sigma_minus, const IndexSet& s,
                                        const Vector& weights, const Vector& gamma_sharp,
                                        double lambda_sharp, const ConstructionOptions& opts) {
  validate_correlation_matrix(sigma_minus);
  const Index m = sigma_minus.rows();
  check_index_set(s, m);
  const IndexSet rest = complement(s, m);
  if (weights.size() != m || gamma_sharp.size() != m) {
    throw Error(ErrorCode::kInvalidArgument, "weights and gamma_sharp must have length p-1");
  }
  if (rest.empty()) throw Error(ErrorCode::kInvalidArgument, "S must be a proper subset");
  if (!(lambda_sharp > 0.0)) throw Error(ErrorCode::kInvalidArgument, "lambda_sharp must be > 0");
  if (!(weights.minCoeff() > 0.0) || weights.maxCoeff() > 1.0) {
    throw Error(ErrorCode::kWeightConditionViolated, "weights must lie in (0, 1]",
                weights.minCoeff());
  }
  for (Index j : rest) {
    if (gamma_sharp(j) != 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "gamma_sharp must vanish outside S");
    }
  }

  const auto llt = factor(sigma_minus);
  Witness w;
  w.scalars["lambda_sharp"] = lambda_sharp;
  w.vectors["S"] = index_vector(s);
  w.vectors["weights"] = weights;

  const LagrangianSigns signs = lagrangian_signs(llt, rest, weights);
  const Vector& zeta = signs.zeta;
  const Vector& g = signs.g;
  w.scalars["sign_iterations"] = signs.iterations;
  w.scalars["sign_margin"] = signs.margin;
  if (!signs.stable) {
    throw Error(ErrorCode::kSignInstability,
                "sign vector of c0 is not stable under a 1e-8 perturbation", signs.margin);
  }

  const Vector wz = weights.cwiseProduct(zeta);
  const double q = wz.dot(g);
  const double lq = lambda_sharp * lambda_sharp * q;
  w.scalars["Q"] = q;
  w.scalars["lambda_sq_Q"] = lq;
  w.vectors["zeta"] = zeta;
  if (1.0 - 1.0 / lq < opts.margin) {
    throw Error(ErrorCode::kWeightConditionViolated,
                "1 - 1/(lambda^2 ||A^{-1/2} W zeta||^2) below the margin", 1.0 - 1.0 / lq);
  }
  const double gs_quad = gamma_sharp.dot(sigma_minus * gamma_sharp);
  require_margin(1.0 - 1.0 / lq - gs_quad >= opts.margin,
                 "1 - 1/(lambda^2 ||A^{-1/2} W zeta||^2) - ||A^{1/2} gamma_sharp||^2 below the "
                 "margin",
                 1.0 - 1.0 / lq - gs_quad);
  check_sparse_cap(gamma_sharp, lambda_sharp, opts, w);

  const Vector c0 = g / (lambda_sharp * q);
  w.vectors["c0"] = c0;
  const Vector ac0 = sigma_minus * c0;
  double orth = 0.0;
  for (Index j : s) orth = std::max(orth, std::abs(ac0(j)));
  w.scalars["orthogonality"] = orth;
  double wmax = 0.0;
  for (Index j : rest) wmax = std::max(wmax, weights(j));
  const double sup_pred = wmax / (lambda_sharp * q);
  w.scalars["sup_norm"] = ac0.cwiseAbs().maxCoeff();
  w.scalars["sup_norm_closed_form"] = sup_pred;
  double wl1 = 0.0;
  for (Index j : rest) wl1 += weights(j) * std::abs(c0(j));
  w.scalars["constraint_residual"] = std::abs(lambda_sharp * wl1 - 1.0);
  w.scalars["c0_quadratic"] = c0.dot(ac0);
  w.scalars["c0_quadratic_closed_form"] = 1.0 / lq;

  const Vector gamma0 = gamma_sharp + c0;
  CovarianceModel model = augmented_sigma(sigma_minus, gamma0, opts.margin);
  ConstructionOutput out = finish(std::move(model), gamma_sharp, lambda_sharp, opts, w, true);

  auto& sc = out.witness.scalars;
  const double scale = 1.0 + std::abs(sup_pred);
  if (sc["orthogonality"] > 1e-10 * std::max(1.0, c0.cwiseAbs().maxCoeff())) {
    throw Error(ErrorCode::kCertificationFailed, "(A c0)_S is not zero", sc["orthogonality"]);
  }
  if (std::abs(sc["sup_norm"] - sup_pred) > 1e-9 * scale) {
    throw Error(ErrorCode::kCertificationFailed, "sup-norm identity failed", sc["sup_norm"]);
  }
  if (sc["constraint_residual"] > 1e-8) {
    throw Error(ErrorCode::kCertificationFailed, "constraint residual too large",
                sc["constraint_residual"]);
  }
  if (std::abs(sc["quadratic_improvement"] - 1.0 / lq) > 1e-9 * (1.0 + 1.0 / lq)) {
    throw Error(ErrorCode::kCertificationFailed, "improvement identity failed",
                sc["quadratic_improvement"]);
  }
  return out;
}

}  // namespace dlasso
