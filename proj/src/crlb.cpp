#include "dlasso/crlb.h"

#include <cmath>
#include <limits>

#include "dlasso/error.h"
#include "dlasso/lasso.h"

namespace dlasso {

double ModelClass::budget() const {
  const double dn = static_cast<double>(n);
  switch (kind) {
    case ClassKind::kL0:
      return s;
    case ClassKind::kL1:
      return m * std::sqrt(dn * s);
    case ClassKind::kLr:
      return m * std::pow(dn, r / 2.0) * std::pow(s, (2.0 - r) / 2.0);
  }
  return 0.0;
}

std::string method_name(CrlbMethod method) {
  switch (method) {
    case CrlbMethod::kClosedForm: return "closed_form";
    case CrlbMethod::kL1PathBisect: return "l1_path_bisect";
    case CrlbMethod::kL0Enumeration: return "l0_enumeration";
  }
  return "unknown";
}

std::string class_name(ClassKind kind) {
  switch (kind) {
    case ClassKind::kL0: return "l0";
    case ClassKind::kL1: return "l1";
    case ClassKind::kLr: return "lr";
  }
  return "unknown";
}

namespace {

double residual_variance(const CovarianceModel& model, const Vector& c) {
  return 1.0 - 2.0 * model.sigma_minus_one().dot(c) + c.dot(model.sigma_minus() * c);
}

CrlbResult closed(const CovarianceModel& model, Vector c, double constraint) {
  CrlbResult r;
  r.argmin_c = std::move(c);
  r.residual_variance = residual_variance(model, r.argmin_c);
  r.bound = 1.0 / r.residual_variance;
  r.constraint_value = constraint;
  r.method = CrlbMethod::kClosedForm;
  return r;
}

}  // namespace

CrlbResult crlb_l1(const CovarianceModel& model, double budget) {
  if (!(budget >= 0.0) || !std::isfinite(budget)) {
    throw Error(ErrorCode::kInvalidArgument, "budget must be finite and nonnegative", budget);
  }
  const Index m = model.p - 1;
  const double g_l1 = model.gamma0.lpNorm<1>();
  if (budget == 0.0) return closed(model, Vector::Zero(m), 0.0);
  if (budget >= g_l1) {
    CrlbResult r = closed(model, model.gamma0, g_l1);
    r.bound = model.theta11;
    return r;
  }

  const Matrix a = model.sigma_minus();
  const Vector b = model.sigma_minus_one();
  LassoOptions opts;
  opts.kkt_tol = 1e-11;
  opts.tol = 1e-13;

  // ||c(mu)||_1 is nonincreasing in mu; c(0) = gamma0 and c(||b||_inf) = 0.
  double mu_lo = 0.0;
  double mu_hi = b.cwiseAbs().maxCoeff();
  Vector c_lo = model.gamma0;
  Vector c_hi = Vector::Zero(m);
  double n_lo = g_l1;
  double n_hi = 0.0;
  const double tol = 1e-6 * budget;
  int it = 0;
  for (; it < 200; ++it) {
    if (std::abs(n_lo - budget) <= tol || std::abs(n_hi - budget) <= tol) break;
    const double mu = 0.5 * (mu_lo + mu_hi);
    opts.init = c_hi;
    const Vector c = quadratic_lasso(a, b, mu, opts).coef;
    const double nc = c.lpNorm<1>();
    if (nc >= budget) {
      mu_lo = mu;
      c_lo = c;
      n_lo = nc;
    } else {
      mu_hi = mu;
      c_hi = c;
      n_hi = nc;
    }
  }
  if (std::abs(n_lo - budget) > tol && std::abs(n_hi - budget) > tol) {
    throw Error(ErrorCode::kNoConvergence,
                "l1 multiplier bisection did not converge; bracket [" + std::to_string(mu_lo) +
                    ", " + std::to_string(mu_hi) + "]",
                mu_hi - mu_lo);
  }
  // The convex combination hitting the budget keeps ||c||_1 <= budget.
  Vector c;
  if (n_lo - n_hi > 0.0) {
    const double theta = (budget - n_hi) / (n_lo - n_hi);
    c = theta * c_lo + (1.0 - theta) * c_hi;
  } else {
    c = c_hi;
  }
  CrlbResult r;
  r.argmin_c = c;
  r.constraint_value = c.lpNorm<1>();
  r.residual_variance = residual_variance(model, c);
  r.bound = 1.0 / r.residual_variance;
  r.method = CrlbMethod::kL1PathBisect;
  r.iterations = it;
  return r;
}

CrlbResult crlb_l0(const CovarianceModel& model, Index s_free) {
  if (model.p > 22) {
    throw Error(ErrorCode::kDimensionTooLarge, "l0 enumeration is limited to p <= 22",
                static_cast<double>(model.p));
  }
  const Index m = model.p - 1;
  if (s_free < 0 || s_free > m) {
    throw Error(ErrorCode::kInvalidArgument, "s_free must lie in 0..p-1", double(s_free));
  }
  if (s_free == 0) return closed(model, Vector::Zero(m), 0.0);
  const Matrix a = model.sigma_minus();
  const Vector b = model.sigma_minus_one();

  // Enlarging a support never increases the residual, so only supports of
  // size exactly s_free are visited.
  const Index k = s_free;
  IndexSet comb(static_cast<size_t>(k));
  for (Index i = 0; i < k; ++i) comb[static_cast<size_t>(i)] = i;
  double best = std::numeric_limits<double>::infinity();
  Vector best_c = Vector::Zero(m);
  int visited = 0;
  while (true) {
    const Matrix ass = submatrix(a, comb, comb);
    const Vector bs = subvector(b, comb);
    Eigen::LLT<Matrix> llt(ass);
    if (llt.info() == Eigen::Success) {
      const Vector cs = llt.solve(bs);
      const double resid = 1.0 - bs.dot(cs);
      if (resid < best) {
        best = resid;
        best_c.setZero();
        for (Index i = 0; i < k; ++i) best_c(comb[static_cast<size_t>(i)]) = cs(i);
      }
    }
    ++visited;
    Index i = k - 1;
    while (i >= 0 && comb[static_cast<size_t>(i)] == m - k + i) --i;
    if (i < 0) break;
    ++comb[static_cast<size_t>(i)];
    for (Index j = i + 1; j < k; ++j) {
      comb[static_cast<size_t>(j)] = comb[static_cast<size_t>(j - 1)] + 1;
    }
  }
  CrlbResult r;
  r.argmin_c = best_c;
  r.residual_variance = best;
  r.bound = 1.0 / best;
  r.constraint_value = static_cast<double>(k);
  r.method = CrlbMethod::kL0Enumeration;
  r.iterations = visited;
  return r;
}

double crlb_known_support(const CovarianceModel& model, const IndexSet& support) {
  return 1.0 / projection_residual_variance(model, support);
}

CrlbReport crlb_compare(const CovarianceModel& model, const EligiblePair& pair,
                        const SharpDirection& direction, const ModelClass& cls) {
  CrlbReport rep;
  rep.class_name = class_name(cls.kind);
  rep.budget = cls.budget();
  rep.theta11 = model.theta11;
  rep.theta11_sharp = direction.theta11_sharp;
  const double lmin2 = model.lambda_min_sq;
  rep.tolerance = 2.0 * pair.l1_product / (lmin2 * lmin2) + 1e-8;
  const Index m = model.p - 1;

  switch (cls.kind) {
    case ClassKind::kL1: {
      rep.crlb = crlb_l1(model, rep.budget).bound;
      rep.gamma_sharp_size = pair.gamma_sharp.lpNorm<1>();
      rep.feasible = rep.gamma_sharp_size <= rep.budget;
      break;
    }
    case ClassKind::kL0: {
      const Index s_free = std::min<Index>(m, static_cast<Index>(std::floor(rep.budget)));
      rep.crlb = crlb_l0(model, s_free).bound;
      rep.gamma_sharp_size = static_cast<double>(support_of(pair.gamma_sharp).size());
      rep.feasible = rep.gamma_sharp_size <= static_cast<double>(s_free);
      break;
    }
    case ClassKind::kLr: {
      ModelClass l1 = cls;
      l1.kind = ClassKind::kL1;
      const double b1 = crlb_l1(model, l1.budget()).bound;
      double b0 = b1;
      if (model.p <= 22) {
        const Index s_free = std::min<Index>(m, static_cast<Index>(std::floor(cls.s)));
        b0 = crlb_l0(model, s_free).bound;
      }
      rep.bracket_low = std::min(b0, b1);
      rep.bracket_high = std::max(b0, b1);
      rep.crlb = std::numeric_limits<double>::quiet_NaN();
      rep.gamma_sharp_size = pair.gamma_sharp.cwiseAbs().array().pow(cls.r).sum();
      rep.feasible = rep.gamma_sharp_size <= rep.budget;
      rep.verdict = "bracketed";
      return rep;
    }
  }
  rep.crlb_dominates = rep.crlb >= rep.theta11_sharp - rep.tolerance;
  if (!rep.feasible) {
    rep.verdict = "gamma_sharp infeasible";
  } else if (rep.theta11_sharp <= rep.crlb + rep.tolerance) {
    rep.verdict = "attained within tol";
  } else {
    rep.verdict = "not attained";
  }
  return rep;
}

}  // namespace dlasso
