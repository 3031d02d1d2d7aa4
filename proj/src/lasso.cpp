#include "dlasso/lasso.h"

#include <cmath>
#include <vector>

#include "dlasso/error.h"

namespace dlasso {

double kkt_residual(const Vector& gradient, const Vector& b, double lambda) {
  double worst = 0.0;
  for (Index j = 0; j < b.size(); ++j) {
    double v;
    if (b(j) > 0.0) {
      v = std::abs(gradient(j) - lambda);
    } else if (b(j) < 0.0) {
      v = std::abs(gradient(j) + lambda);
    } else {
      v = std::max(0.0, std::abs(gradient(j)) - lambda);
    }
    worst = std::max(worst, v);
  }
  return worst;
}

double default_lambda(Index p, Index n, double c) {
  return c * std::sqrt(std::log(static_cast<double>(p)) / static_cast<double>(n));
}

double lasso_objective(const MatrixRef& x, const VectorRef& y, const Vector& b, double lambda) {
  const double n = static_cast<double>(x.rows());
  return (y - x * b).squaredNorm() / n + 2.0 * lambda * b.lpNorm<1>();
}

namespace {

void check_lambda(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::kInvalidArgument, "lambda must be positive and finite", lambda);
  }
}

// Coordinate descent on the residual form. `r` holds y - X b throughout.
class ResidualSolver {
 public:
  ResidualSolver(const MatrixRef& x, const VectorRef& y, double lambda, const LassoOptions& opts)
      : x_(x), y_(y), lambda_(lambda), opts_(opts), n_(static_cast<double>(x.rows())) {
    const Index p = x.cols();
    col_sq_.resize(p);
    for (Index j = 0; j < p; ++j) col_sq_(j) = x.col(j).squaredNorm() / n_;
    b_ = opts.init.size() == p ? opts.init : Vector::Zero(p);
    r_ = y - x * b_;
  }

  LassoFit run() {
    const Index p = x_.cols();
    LassoFit fit;
    fit.lambda = lambda_;
    for (Index j = 0; j < p; ++j) {
      if (col_sq_(j) == 0.0) {
        ++fit.degenerate_columns;
        b_(j) = 0.0;
      }
    }
    r_ = y_ - x_ * b_;
    double prev_obj = objective();
    std::vector<Index> active;
    int iters = 0;
    while (iters < opts_.max_iters) {
      double dmax = sweep_all();
      ++iters;
      track(prev_obj, fit);
      if (dmax < opts_.tol) {
        r_ = y_ - x_ * b_;
        const Vector g = x_.transpose() * r_ / n_;
        fit.kkt_residual = kkt_residual(g, b_, lambda_);
        if (fit.kkt_residual <= opts_.kkt_tol) {
          fit.converged = true;
          break;
        }
        continue;
      }
      active.clear();
      for (Index j = 0; j < p; ++j) {
        if (b_(j) != 0.0) active.push_back(j);
      }
      while (iters < opts_.max_iters) {
        dmax = 0.0;
        for (Index j : active) dmax = std::max(dmax, update(j));
        ++iters;
        track(prev_obj, fit);
        if (dmax < opts_.tol) break;
      }
    }
    fit.iterations = iters;
    fit.coef = b_;
    fit.objective = objective();
    if (!fit.converged) {
      throw Error(ErrorCode::kNoConvergence,
                  "coordinate descent did not converge in " + std::to_string(iters) + " sweeps",
                  fit.kkt_residual);
    }
    return fit;
  }

 private:
  double update(Index j) {
    const double cs = col_sq_(j);
    if (cs == 0.0) return 0.0;
    const double old = b_(j);
    const double g = x_.col(j).dot(r_) / n_ + cs * old;
    const double nb = soft_threshold(g, lambda_) / cs;
    const double delta = nb - old;
    if (delta != 0.0) {
      r_.noalias() -= delta * x_.col(j);
      b_(j) = nb;
    }
    return std::abs(delta);
  }

  double sweep_all() {
    double dmax = 0.0;
    for (Index j = 0; j < x_.cols(); ++j) dmax = std::max(dmax, update(j));
    return dmax;
  }

  double objective() const { return r_.squaredNorm() / n_ + 2.0 * lambda_ * b_.lpNorm<1>(); }

  void track(double& prev, LassoFit& fit) const {
    const double obj = objective();
    if (obj > prev + 1e-12 * (1.0 + std::abs(prev))) fit.objective_monotone = false;
    prev = obj;
  }

  const MatrixRef& x_;
  const VectorRef& y_;
  double lambda_;
  const LassoOptions& opts_;
  double n_;
  Vector col_sq_;
  Vector b_;
  Vector r_;
};

}  // namespace

LassoFit lasso(const MatrixRef& x, const VectorRef& y, double lambda, const LassoOptions& opts) {
  check_lambda(lambda);
  if (x.rows() != y.size()) throw Error(ErrorCode::kInvalidArgument, "x and y row mismatch");
  if (x.rows() < 1 || x.cols() < 1) throw Error(ErrorCode::kInvalidArgument, "empty design");
  if (!x.allFinite() || !y.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "non-finite entries in lasso input");
  }
  ResidualSolver solver(x, y, lambda, opts);
  return solver.run();
}

LassoFit quadratic_lasso(const Matrix& q_mat, const Vector& q_vec, double lambda,
                         const LassoOptions& opts) {
  check_lambda(lambda);
  const Index p = q_vec.size();
  if (q_mat.rows() != p || q_mat.cols() != p) {
    throw Error(ErrorCode::kInvalidArgument, "quadratic form shape mismatch");
  }
  Vector c = opts.init.size() == p ? opts.init : Vector::Zero(p);
  Vector qc = q_mat * c;
  LassoFit fit;
  fit.lambda = lambda;
  auto objective = [&]() { return c.dot(qc) - 2.0 * q_vec.dot(c) + 2.0 * lambda * c.lpNorm<1>(); };
  auto update = [&](Index j) {
    const double d = q_mat(j, j);
    if (d <= 0.0) return 0.0;
    const double old = c(j);
    const double g = q_vec(j) - qc(j) + d * old;
    const double nc = soft_threshold(g, lambda) / d;
    const double delta = nc - old;
    if (delta != 0.0) {
      qc.noalias() += delta * q_mat.col(j);
      c(j) = nc;
    }
    return std::abs(delta);
  };
  for (Index j = 0; j < p; ++j) {
    if (q_mat(j, j) <= 0.0) ++fit.degenerate_columns;
  }
  double prev = objective();
  auto track = [&]() {
    const double obj = objective();
    if (obj > prev + 1e-12 * (1.0 + std::abs(prev))) fit.objective_monotone = false;
    prev = obj;
  };
  std::vector<Index> active;
  int iters = 0;
  while (iters < opts.max_iters) {
    double dmax = 0.0;
    for (Index j = 0; j < p; ++j) dmax = std::max(dmax, update(j));
    ++iters;
    track();
    if (dmax < opts.tol) {
      qc.noalias() = q_mat * c;
      fit.kkt_residual = kkt_residual(q_vec - qc, c, lambda);
      if (fit.kkt_residual <= opts.kkt_tol) {
        fit.converged = true;
        break;
      }
      continue;
    }
    active.clear();
    for (Index j = 0; j < p; ++j) {
      if (c(j) != 0.0) active.push_back(j);
    }
    while (iters < opts.max_iters) {
      dmax = 0.0;
      for (Index j : active) dmax = std::max(dmax, update(j));
      ++iters;
      track();
      if (dmax < opts.tol) break;
    }
  }
  fit.iterations = iters;
  fit.coef = c;
  fit.objective = objective();
  if (!fit.converged) {
    throw Error(ErrorCode::kNoConvergence,
                "coordinate descent did not converge in " + std::to_string(iters) + " sweeps",
                fit.kkt_residual);
  }
  return fit;
}

LassoFit population_lasso(const CovarianceModel& model, double lambda, const LassoOptions& opts) {
  const Matrix a = model.sigma_minus();
  const Vector b = model.sigma_minus_one();
  LassoFit fit = quadratic_lasso(a, b, lambda, opts);
  fit.objective += 1.0;
  return fit;
}

NodewiseFit nodewise_lasso(const MatrixRef& x, double lambda, const LassoOptions& opts) {
  if (x.rows() < 2) throw Error(ErrorCode::kInvalidArgument, "node-wise Lasso needs n >= 2");
  if (x.cols() < 2) throw Error(ErrorCode::kInvalidArgument, "node-wise Lasso needs p >= 2");
  const Index p = x.cols();
  const MatrixRef rest = x.rightCols(p - 1);
  const VectorRef first = x.col(0);
  NodewiseFit out;
  out.fit = lasso(rest, first, lambda, opts);
  out.residual_sq = (first - rest * out.fit.coef).squaredNorm() / static_cast<double>(x.rows());
  out.l1_norm = out.fit.coef.lpNorm<1>();
  return out;
}

SlowRateCertificate slow_rate_certificate(const MatrixRef& x, const LassoFit& fit,
                                          const Vector& gamma_sharp, double lambda_eps_sharp,
                                          double lambda_node, double kkt_tol) {
  if (lambda_node < 2.0 * lambda_eps_sharp) {
    throw Error(ErrorCode::kHypothesisViolated, "slow-rate bound needs lambda_node >= 2 lambda_eps",
                lambda_node / lambda_eps_sharp);
  }
  const Index p = x.cols();
  const double n = static_cast<double>(x.rows());
  const MatrixRef rest = x.rightCols(p - 1);
  const VectorRef first = x.col(0);
  const Vector& gh = fit.coef;

  SlowRateCertificate c;
  const Vector delta = gh - gamma_sharp;
  const double quad = (rest * delta).squaredNorm() / n;
  const double l1_hat = gh.lpNorm<1>();
  const double l1_sharp = gamma_sharp.lpNorm<1>();
  c.lhs_a = quad + (lambda_node - lambda_eps_sharp) * l1_hat;
  c.rhs_a = (lambda_node + lambda_eps_sharp) * l1_sharp;
  c.lhs_b = l1_hat;
  c.rhs_b = (lambda_node + lambda_eps_sharp) / (lambda_node - lambda_eps_sharp) * l1_sharp;

  const Vector eps_sharp = first - rest * gamma_sharp;
  c.noise_sup = (rest.transpose() * eps_sharp).cwiseAbs().maxCoeff() / n;
  c.event_c = c.noise_sup <= lambda_eps_sharp;

  const Vector g = rest.transpose() * (first - rest * gh) / n;
  const double kkt = std::max(kkt_residual(g, gh, lambda_node), kkt_tol);
  c.slack = kkt * delta.lpNorm<1>() + 1e-12 * (1.0 + std::abs(c.rhs_a));
  c.ineq_a = c.lhs_a <= c.rhs_a + c.slack;
  c.ineq_b = c.lhs_b <= c.rhs_b + c.slack / (lambda_node - lambda_eps_sharp);
  return c;
}

}  // namespace dlasso
