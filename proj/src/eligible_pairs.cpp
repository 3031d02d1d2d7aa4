#include "dlasso/eligible_pairs.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dlasso/error.h"

namespace dlasso {

namespace {

constexpr double kRoundOff = 1e-12;

void check_gamma_length(const CovarianceModel& model, const Vector& g) {
  if (g.size() != model.p - 1) {
    throw Error(ErrorCode::kInvalidArgument, "gamma vector must have length p-1");
  }
}

Eigen::LLT<Matrix> checked_llt(const Matrix& a) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kSingularSubmatrix, "Sigma_{S,S} is not positive definite");
  }
  const double dmin = Matrix(llt.matrixL()).diagonal().minCoeff();
  if (!(dmin > 1e-8)) {
    throw Error(ErrorCode::kSingularSubmatrix, "Sigma_{S,S} is numerically singular", dmin);
  }
  return llt;
}

}  // namespace

IndexSet support_of(const Vector& v, double tol) {
  IndexSet s;
  for (Index j = 0; j < v.size(); ++j) {
    if (std::abs(v(j)) > tol) s.push_back(j);
  }
  return s;
}

PairCheck check_pair(const CovarianceModel& model, const Vector& gamma_sharp,
                     double lambda_sharp, double eps_eligible) {
  check_gamma_length(model, gamma_sharp);
  if (!(lambda_sharp > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "lambda_sharp must be positive", lambda_sharp);
  }
  PairCheck c;
  c.pair.gamma_sharp = gamma_sharp;
  c.pair.lambda_sharp = lambda_sharp;
  const Vector resid = model.sigma_minus() * (gamma_sharp - model.gamma0);
  c.pair.linf_residual = resid.size() ? resid.cwiseAbs().maxCoeff() : 0.0;
  c.pair.l1_product = lambda_sharp * gamma_sharp.lpNorm<1>();
  c.linf_ok = c.pair.linf_residual <= lambda_sharp * (1.0 + 1e-9);
  c.l1_ok = c.pair.l1_product <= eps_eligible;
  return c;
}

EligiblePair certify_pair(const CovarianceModel& model, const Vector& gamma_sharp,
                          double lambda_sharp, double eps_eligible) {
  const PairCheck c = check_pair(model, gamma_sharp, lambda_sharp, eps_eligible);
  if (!c.linf_ok) {
    throw Error(ErrorCode::kLinfViolated,
                "||Sigma_{-1,-1}(gamma_sharp - gamma0)||_inf exceeds lambda_sharp",
                c.pair.linf_residual);
  }
  if (!c.l1_ok) {
    throw Error(ErrorCode::kL1ProductTooLarge, "lambda_sharp ||gamma_sharp||_1 exceeds eps_eligible",
                c.pair.l1_product);
  }
  return c.pair;
}

SharpDirection sharp_direction(const CovarianceModel& model, const EligiblePair& pair) {
  check_gamma_length(model, pair.gamma_sharp);
  const Index p = model.p;
  SharpDirection d;
  d.denominator = 1.0 - model.sigma_minus_one().dot(pair.gamma_sharp);
  if (!(d.denominator > 1e-10)) {
    throw Error(ErrorCode::kDegenerateDenominator, "1 - Sigma_{1,-1} gamma_sharp <= 1e-10",
                d.denominator);
  }
  d.theta1_sharp.resize(p);
  d.theta1_sharp(0) = 1.0;
  d.theta1_sharp.tail(p - 1) = -pair.gamma_sharp;
  d.theta1_sharp /= d.denominator;
  d.theta11_sharp = d.theta1_sharp(0);
  d.lambda0_sharp = pair.lambda_sharp / d.denominator;
  d.improvement = model.theta11 - d.theta11_sharp;

  Vector st = model.sigma * d.theta1_sharp;
  d.quad_form = d.theta1_sharp.dot(st);
  st(0) -= 1.0;
  d.sup_residual = st.cwiseAbs().maxCoeff();

  const double l1 = pair.l1_product;
  const double lmin2 = model.lambda_min_sq;
  d.quad_form_ok = std::abs(d.quad_form - d.theta11_sharp) <=
                   2.0 * l1 / (d.denominator * d.denominator) + kRoundOff * d.theta11_sharp;
  d.variance_ok = d.theta11_sharp <= model.theta11 + 2.0 * l1 / (lmin2 * lmin2) +
                                         kRoundOff * model.theta11;
  d.sup_residual_ok = d.sup_residual <= d.lambda0_sharp * (1.0 + 1e-9) + kRoundOff;
  d.denominator_ok = d.denominator >= lmin2 - 2.0 * l1 - kRoundOff;
  return d;
}

PairDistance pair_distance(const CovarianceModel& model, const EligiblePair& a,
                           const EligiblePair& b) {
  check_gamma_length(model, a.gamma_sharp);
  check_gamma_length(model, b.gamma_sharp);
  const double scale = std::max(std::abs(a.lambda_sharp), std::abs(b.lambda_sharp));
  if (std::abs(a.lambda_sharp - b.lambda_sharp) > 1e-12 * scale) {
    throw Error(ErrorCode::kLambdaMismatch, "pairs must share lambda_sharp",
                a.lambda_sharp - b.lambda_sharp);
  }
  const double lambda = a.lambda_sharp;
  const Vector delta = a.gamma_sharp - b.gamma_sharp;
  PairDistance out;
  out.distance = delta.dot(model.sigma_minus() * delta);
  out.bound = 2.0 * lambda * delta.lpNorm<1>();
  out.reference_bound = lambda * (a.gamma_sharp.lpNorm<1>() + b.gamma_sharp.lpNorm<1>());
  out.bound_holds = out.distance <= out.bound * (1.0 + 1e-9) + kRoundOff;
  return out;
}

double projection_residual_variance(const CovarianceModel& model, const IndexSet& s) {
  if (s.empty()) return 1.0;
  const Matrix a = model.sigma_minus();
  const Vector b = model.sigma_minus_one();
  const Matrix ass = submatrix(a, s, s);
  const Vector bs = subvector(b, s);
  const auto llt = checked_llt(ass);
  return 1.0 - bs.dot(llt.solve(bs));
}

ProjectionResult projection_pair(const CovarianceModel& model, const IndexSet& s) {
  const Index m = model.p - 1;
  if (s.empty()) throw Error(ErrorCode::kInvalidArgument, "S must be nonempty");
  for (Index j : s) {
    if (j < 0 || j >= m) throw Error(ErrorCode::kInvalidArgument, "index outside 0..p-2");
  }
  const Matrix a = model.sigma_minus();
  const Vector b = model.sigma_minus_one();
  const IndexSet rest = complement(s, m);
  const Matrix ass = submatrix(a, s, s);
  const auto llt = checked_llt(ass);

  ProjectionResult out;
  out.gamma_s = Vector::Zero(m);
  const Vector coef = llt.solve(subvector(b, s));
  for (size_t i = 0; i < s.size(); ++i) out.gamma_s(s[i]) = coef(static_cast<Index>(i));

  if (rest.empty()) {
    out.v_exact = 0.0;
    out.v_bound = 0.0;
    out.bound_holds = true;
    return out;
  }
  const Matrix a_rs = submatrix(a, rest, s);
  const Matrix schur = submatrix(a, rest, rest) - a_rs * llt.solve(a_rs.transpose());
  out.schur_l1_norm = l1_operator_norm(schur);
  const Vector g_rest = subvector(model.gamma0, rest);
  out.v_bound = out.schur_l1_norm * g_rest.cwiseAbs().maxCoeff();
  const Vector v = a * (model.gamma0 - out.gamma_s);
  out.v_exact = subvector(v, rest).cwiseAbs().maxCoeff();
  out.bound_holds = out.v_exact <= out.v_bound * (1.0 + 1e-9) + kRoundOff;
  return out;
}

double sparsity_index(const Vector& v) {
  const double l2 = v.norm();
  if (!(l2 > 0.0)) throw Error(ErrorCode::kZeroVector, "sparsity index of the zero vector");
  return v.lpNorm<1>() * v.lpNorm<Eigen::Infinity>() / l2;
}

TopSResult top_s_projection_pair(const CovarianceModel& model, Index s, double eps_eligible) {
  const Index m = model.p - 1;
  if (s < 1 || s > model.p - 2) {
    throw Error(ErrorCode::kInvalidArgument, "s must lie in 1..p-2", static_cast<double>(s));
  }
  std::vector<Index> order(static_cast<size_t>(m));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index i, Index j) {
    return std::abs(model.gamma0(i)) > std::abs(model.gamma0(j));
  });
  TopSResult out;
  out.support.assign(order.begin(), order.begin() + s);
  std::sort(out.support.begin(), out.support.end());

  const Vector tail = subvector(model.gamma0, complement(out.support, m));
  out.kappa = sparsity_index(tail);
  out.tail_l1 = tail.lpNorm<1>();

  const ProjectionResult proj = projection_pair(model, out.support);
  out.c_const = proj.schur_l1_norm;
  if (!(out.c_const > 0.0)) {
    throw Error(ErrorCode::kSingularSubmatrix, "vanishing Schur complement norm");
  }
  out.lambda_s = out.kappa / (out.c_const * out.tail_l1);
  out.non_sparsity_witness = out.lambda_s * model.gamma0.lpNorm<1>();

  const PairCheck check = check_pair(model, proj.gamma_s, out.lambda_s, eps_eligible);
  out.candidate = check.pair;
  out.certified = check.eligible();
  if (!check.linf_ok) {
    out.failure = "LinfViolated";
  } else if (!check.l1_ok) {
    out.failure = "L1ProductTooLarge";
  }
  return out;
}

ProjectSCheck projects_bound(const CovarianceModel& model, const EligiblePair& pair,
                             const SharpDirection& direction) {
  const IndexSet s = support_of(pair.gamma_sharp);
  const double ss = static_cast<double>(s.size());
  ProjectSCheck out;
  out.applicable = pair.lambda_sharp * std::sqrt(ss) <= 0.1;
  const double resid = projection_residual_variance(model, s);
  out.lhs = std::abs(direction.denominator - resid);
  out.bound = pair.l1_product +
              ss * pair.lambda_sharp * pair.lambda_sharp / model.lambda_min_sq + kRoundOff;
  out.holds = out.lhs <= out.bound;
  return out;
}

}  // namespace dlasso
