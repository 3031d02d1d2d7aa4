#include "dlasso/debias.h"

#include <cmath>

#include "dlasso/error.h"
#include "dlasso/tail_bounds.h"

namespace dlasso {

namespace {

void set_interval(DebiasOutput& out, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "alpha must lie in (0,1)", alpha);
  }
  const double z = normal_quantile(1.0 - alpha / 2.0);
  const double half = z * std::sqrt(out.variance_proxy / static_cast<double>(out.n));
  out.ci_low = out.estimate - half;
  out.ci_high = out.estimate + half;
}

void check_truth(const std::optional<SimulationTruth>& truth, Index n, Index p) {
  if (!truth) return;
  if (truth->beta0.size() != p || truth->eps.size() != n) {
    throw Error(ErrorCode::kInvalidArgument, "simulation truth has inconsistent shapes");
  }
}

}  // namespace

DebiasOutput debias_known_sigma(const MatrixRef& x, const VectorRef& y,
                                const CovarianceModel& model, const SharpDirection& direction,
                                double lambda, const std::optional<SimulationTruth>& truth,
                                const DebiasOptions& opts) {
  const Index n = x.rows();
  const Index p = x.cols();
  if (n % 2 != 0) throw Error(ErrorCode::kOddSampleSize, "sample size must be even", double(n));
  if (n < 2 || y.size() != n) throw Error(ErrorCode::kInvalidArgument, "x and y size mismatch");
  if (direction.theta1_sharp.size() != p || model.p != p) {
    throw Error(ErrorCode::kInvalidArgument, "direction dimension does not match x");
  }
  check_truth(truth, n, p);
  if (opts.force_beta_hat_to_truth && !truth) {
    throw Error(ErrorCode::kInvalidArgument, "forcing beta_hat requires the simulation truth");
  }
  const Index h = n / 2;
  const double dn = static_cast<double>(n);
  const Vector& theta = direction.theta1_sharp;

  const MatrixRef xa = x.topRows(h);
  const MatrixRef xb = x.bottomRows(h);
  const VectorRef ya = y.head(h);
  const VectorRef yb = y.tail(h);

  Vector beta_a;
  Vector beta_b;
  if (opts.force_beta_hat_to_truth) {
    beta_a = truth->beta0;
    beta_b = truth->beta0;
  } else {
    beta_a = lasso(xa, ya, lambda, opts.lasso).coef;
    beta_b = lasso(xb, yb, lambda, opts.lasso).coef;
  }

  const Vector xa_theta = xa * theta;
  const Vector xb_theta = xb * theta;
  const double b_first = beta_b(0) + 2.0 * xa_theta.dot(ya - xa * beta_b) / dn;
  const double b_second = beta_a(0) + 2.0 * xb_theta.dot(yb - xb * beta_a) / dn;

  DebiasOutput out;
  out.n = n;
  out.lambda = lambda;
  out.estimate = 0.5 * (b_first + b_second);
  out.variance_proxy = direction.theta11_sharp;
  set_interval(out, opts.alpha);

  if (truth) {
    out.has_truth = true;
    const Vector& beta0 = truth->beta0;
    const Vector& eps = truth->eps;
    out.linear_term = (xa_theta.dot(eps.head(h)) + xb_theta.dot(eps.tail(h))) / dn;
    const Vector sigma_theta = model.sigma * theta;
    // Half I debiases with the pilot from half II and vice versa.
    const Vector delta[2] = {beta_b - beta0, beta_a - beta0};
    const Vector* x_theta[2] = {&xa_theta, &xb_theta};
    const MatrixRef* xs[2] = {&xa, &xb};
    double rem = 0.0;
    for (int k = 0; k < 2; ++k) {
      const double r = delta[k](0) - 2.0 * x_theta[k]->dot(*xs[k] * delta[k]) / dn;
      out.term_ii[k] = delta[k](0) - sigma_theta.dot(delta[k]);
      out.term_i[k] = r - out.term_ii[k];
      out.beta_error_l1[k] = delta[k].lpNorm<1>();
      rem += 0.5 * r;
    }
    out.remainder = rem;
    out.decomposition_error =
        std::abs(out.estimate - beta0(0) - (out.linear_term + out.remainder));
    const double term_i_avg = 0.5 * (out.term_i[0] + out.term_i[1]);
    out.sup_residual = direction.sup_residual;
    out.sup_residual_bound = direction.lambda0_sharp;
    const double bound = direction.lambda0_sharp *
                             (out.beta_error_l1[0] + out.beta_error_l1[1]) / 2.0 * (1.0 + 1e-9) +
                         std::abs(term_i_avg) + 1e-12;
    out.remainder_bound_ok = std::abs(out.remainder) <= bound;
  }
  return out;
}

DebiasOutput debias_unknown_sigma(const MatrixRef& x, const VectorRef& y, double lambda,
                                  double lambda_node, const std::optional<SimulationTruth>& truth,
                                  const DebiasOptions& opts) {
  const Index n = x.rows();
  const Index p = x.cols();
  if (n < 4) throw Error(ErrorCode::kInvalidArgument, "sample size must be at least 4");
  if (y.size() != n) throw Error(ErrorCode::kInvalidArgument, "x and y size mismatch");
  if (!(lambda_node > 0.0)) throw Error(ErrorCode::kInvalidArgument, "lambda_node must be > 0");
  check_truth(truth, n, p);
  if (opts.force_beta_hat_to_truth && !truth) {
    throw Error(ErrorCode::kInvalidArgument, "forcing beta_hat requires the simulation truth");
  }
  const double dn = static_cast<double>(n);

  const Vector beta_hat =
      opts.force_beta_hat_to_truth ? truth->beta0 : lasso(x, y, lambda, opts.lasso).coef;
  const NodewiseFit node = nodewise_lasso(x, lambda_node, opts.lasso);
  const double denom = node.residual_sq + lambda_node * node.l1_norm;
  if (!(denom > 1e-10)) {
    throw Error(ErrorCode::kDegenerateDenominator, "node-wise denominator below 1e-10", denom);
  }
  Vector theta(p);
  theta(0) = 1.0;
  theta.tail(p - 1) = -node.fit.coef;
  theta /= denom;

  const Vector x_theta = x * theta;
  const Vector resid = y - x * beta_hat;

  DebiasOutput out;
  out.n = n;
  out.lambda = lambda;
  out.lambda_node = lambda_node;
  out.gamma_hat = node.fit.coef;
  out.node_denominator = denom;
  out.estimate = beta_hat(0) + x_theta.dot(resid) / dn;
  out.variance_proxy = x_theta.squaredNorm() / dn;
  set_interval(out, opts.alpha);

  Vector sup = x.transpose() * x_theta / dn;
  sup(0) -= 1.0;
  out.sup_residual = sup.cwiseAbs().maxCoeff();
  const double kkt = node.fit.kkt_residual;
  out.sup_residual_bound =
      std::max(lambda_node + kkt, kkt * node.l1_norm) / denom * (1.0 + 1e-9) + 1e-12;

  if (truth) {
    out.has_truth = true;
    const Vector delta = beta_hat - truth->beta0;
    out.linear_term = x_theta.dot(truth->eps) / dn;
    out.remainder = delta(0) - x_theta.dot(x * delta) / dn;
    out.decomposition_error =
        std::abs(out.estimate - truth->beta0(0) - (out.linear_term + out.remainder));
    const double holder = out.sup_residual * delta.lpNorm<1>() * (1.0 + 1e-9) + 1e-12;
    out.remainder_bound_ok =
        std::abs(out.remainder) <= holder && out.sup_residual <= out.sup_residual_bound;
  }
  return out;
}

LinearityDiagnostic linearity_diagnostic(const MatrixRef& x, const VectorRef& eps,
                                         const Vector& gamma_hat, double d_hat,
                                         const Vector& gamma_sharp, double d_sharp,
                                         double threshold) {
  const Index p = x.cols();
  if (gamma_hat.size() != p - 1 || gamma_sharp.size() != p - 1) {
    throw Error(ErrorCode::kInvalidArgument, "gamma vectors must have length p-1");
  }
  LinearityDiagnostic d;
  d.rate = std::sqrt(std::log(static_cast<double>(p))) * (gamma_hat - gamma_sharp).lpNorm<1>();
  d.condition_holds = d.rate <= threshold;
  Vector th(p);
  th(0) = 1.0 / d_hat - 1.0 / d_sharp;
  th.tail(p - 1) = -gamma_hat / d_hat + gamma_sharp / d_sharp;
  const Vector v = x.transpose() * eps / static_cast<double>(x.rows());
  d.gap = std::abs(th.dot(v));
  d.gap_bound = th.lpNorm<1>() * v.cwiseAbs().maxCoeff();
  d.gap_bound_ok = d.gap <= d.gap_bound * (1.0 + 1e-9) + 1e-15;
  return d;
}

double sigma_sharp_sq(const CovarianceModel& model, const Vector& gamma_sharp) {
  return 1.0 - 2.0 * gamma_sharp.dot(model.sigma_minus_one()) +
         gamma_sharp.dot(model.sigma_minus() * gamma_sharp);
}

double lambda_eps_sharp(const CovarianceModel& model, const EligiblePair& pair, double t,
                        Index n, bool union_bound) {
  if (t < 0.0) throw Error(ErrorCode::kInvalidArgument, "t must be nonnegative", t);
  const double s2 = sigma_sharp_sq(model, pair.gamma_sharp);
  const double tt = union_bound ? union_bound_t(t, static_cast<double>(model.p)) : t;
  return correlated_pair_tail(static_cast<double>(n), tt, pair.lambda_sharp,
                              std::sqrt(std::max(s2, 0.0)));
}

}  // namespace dlasso
