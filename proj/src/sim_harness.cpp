#include "dlasso/sim_harness.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

#include "dlasso/error.h"
#include "dlasso/matrix_io.h"
#include "dlasso/stats.h"

namespace dlasso {

std::string estimator_name(EstimatorKind kind) {
  return kind == EstimatorKind::kKnown ? "known_sigma" : "unknown_sigma";
}

Matrix make_sigma_minus(const std::string& kind, Index dim, double rho) {
  if (dim < 1) throw Error(ErrorCode::kInvalidArgument, "dimension must be positive");
  if (kind == "identity") return Matrix::Identity(dim, dim);
  if (kind == "equicorrelation") {
    Matrix a = Matrix::Constant(dim, dim, rho);
    a.diagonal().setOnes();
    return a;
  }
  if (kind == "ar1") {
    Matrix a(dim, dim);
    for (Index i = 0; i < dim; ++i) {
      for (Index j = 0; j < dim; ++j) a(i, j) = std::pow(rho, std::abs(double(i - j)));
    }
    return a;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown sigma_minus kind '" + kind + "'");
}

namespace {

IndexSet first_indices(Index s) {
  IndexSet out;
  for (Index i = 0; i < s; ++i) out.push_back(i);
  return out;
}

Vector sharp_on_first(Index m, Index s, double value) {
  Vector g = Vector::Zero(m);
  if (value != 0.0) g.head(std::min(s, m)).setConstant(value);
  return g;
}

double z_quadratic(const Matrix& a, const Vector& z) {
  if (a.isIdentity(0.0)) return z.squaredNorm();
  return z.dot(Eigen::LLT<Matrix>(a).solve(z));
}

}  // namespace

ConstructionOutput make_instance(const InstanceSpec& spec) {
  if (spec.p < 2) throw Error(ErrorCode::kInvalidArgument, "p must be at least 2");
  const Index m = spec.p - 1;
  const std::string& kind = spec.construction;
  if (kind == "identity") {
    ConstructionOutput out;
    out.model = build_model(Matrix::Identity(spec.p, spec.p));
    const double lambda = spec.lambda_sharp > 0.0 ? spec.lambda_sharp : 0.01;
    out.pair = certify_pair(out.model, Vector::Zero(m), lambda, spec.options.eps_eligible);
    out.direction = sharp_direction(out.model, out.pair);
    out.witness.scalars["lambda_sharp"] = lambda;
    return out;
  }
  const Matrix a = make_sigma_minus(spec.sigma_minus, m, spec.rho);
  if (kind == "direct") {
    const Vector z = Vector::Ones(m);
    const Vector gs = sharp_on_first(m, spec.s, spec.gamma_sharp_value);
    const double lambda = spec.lambda_sharp > 0.0
                              ? spec.lambda_sharp
                              : std::sqrt(spec.improvement / z_quadratic(a, z));
    return construct_direct(a, z, gs, lambda, spec.options);
  }
  if (kind == "regression") {
    const Vector gs = sharp_on_first(m, spec.s, spec.gamma_sharp_value);
    RegressionOptions ro;
    static_cast<ConstructionOptions&>(ro) = spec.options;
    const Index big_n = spec.big_n > 0 ? spec.big_n : 2 * spec.p;
    return construct_regression(a, gs, big_n, spec.seed, spec.t, ro);
  }
  if (kind == "reversed-irrep") {
    const IndexSet s = first_indices(spec.s);
    const Vector z = Vector::Ones(m - spec.s);
    const Vector g0s = Vector::Constant(spec.s, spec.gamma_sharp_value);
    double lambda = spec.lambda_sharp;
    if (!(lambda > 0.0)) {
      Vector zf = Vector::Zero(m);
      zf.tail(m - spec.s).setOnes();
      lambda = std::sqrt(spec.improvement / z_quadratic(a, zf));
    }
    return construct_reversed_irrepresentable(a, s, z, g0s, lambda, spec.options);
  }
  if (kind == "lagrangian") {
    const IndexSet s = first_indices(spec.s);
    Vector w = Vector::Ones(m);
    const Vector gs = sharp_on_first(m, spec.s, spec.gamma_sharp_value);
    double lambda = spec.lambda_sharp;
    if (!(lambda > 0.0)) lambda = 1.0 / std::sqrt(spec.improvement * lagrangian_q(a, s, w));
    return construct_lagrangian(a, s, w, gs, lambda, spec.options);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown construction '" + kind + "'");
}

std::vector<Vector> beta0_grid(const ExperimentConfig& config, Index p) {
  const Beta0Policy& b = config.beta0;
  if (b.magnitudes.empty()) throw Error(ErrorCode::kInvalidArgument, "beta0 grid is empty");
  if (b.s0 < 1 || b.s0 > p) throw Error(ErrorCode::kInvalidArgument, "beta0 support size");
  ModelClass cls = config.model_class;
  cls.n = config.n;
  const double budget = cls.budget();
  std::vector<Vector> grid;
  for (size_t k = 0; k < b.magnitudes.size(); ++k) {
    const bool scaled = k < b.scaled.size() && b.scaled[k];
    const double mag =
        scaled ? b.magnitudes[k] / std::sqrt(static_cast<double>(config.n)) : b.magnitudes[k];
    Vector beta = Vector::Zero(p);
    beta.head(b.s0).setConstant(mag);
    double size;
    if (cls.kind == ClassKind::kL0) {
      size = static_cast<double>(b.s0);
    } else {
      size = beta.cwiseAbs().array().pow(cls.kind == ClassKind::kL1 ? 1.0 : cls.r).sum();
    }
    if (size > (1.0 - b.eta) * budget) {
      throw Error(ErrorCode::kInvalidArgument,
                  "beta0 grid point is too close to the model-class boundary", size);
    }
    grid.push_back(std::move(beta));
  }
  return grid;
}

namespace {

struct Context {
  const ExperimentConfig* config = nullptr;
  const ConstructionOutput* inst = nullptr;
  std::vector<Vector> grid;
  double lambda_known = 0.0;
  double lambda_unknown = 0.0;
  double lambda_node = 0.0;
};

ReplicateRow make_row(Index i, std::uint64_t seed, Index g, EstimatorKind kind) {
  ReplicateRow r;
  r.replicate = i;
  r.seed = seed;
  r.grid_index = g;
  r.estimator = estimator_name(kind);
  return r;
}

void fill_row(ReplicateRow& r, const DebiasOutput& out, double beta0_1, Index n) {
  r.status = "ok";
  r.beta0_1 = beta0_1;
  r.estimate = out.estimate;
  r.variance_proxy = out.variance_proxy;
  r.ci_low = out.ci_low;
  r.ci_high = out.ci_high;
  r.studentized = std::sqrt(static_cast<double>(n)) * (out.estimate - beta0_1) /
                  std::sqrt(out.variance_proxy);
  r.covered = (out.ci_low <= beta0_1 && beta0_1 <= out.ci_high) ? 1 : 0;
  r.linear_term = out.linear_term;
  r.remainder = out.remainder;
  r.decomposition_ok = out.decomposition_error <= 1e-12 * (1.0 + std::abs(beta0_1)) ? 1 : 0;
  r.remainder_bound_ok = out.remainder_bound_ok ? 1 : 0;
}

void run_replicate(const Context& ctx, Index i, ReplicateRow* rows) {
  const ExperimentConfig& cfg = *ctx.config;
  const std::uint64_t seed = derive_seed(cfg.master_seed, static_cast<std::uint64_t>(i));
  const Index g = i % static_cast<Index>(ctx.grid.size());
  const Vector& beta0 = ctx.grid[static_cast<size_t>(g)];
  DesignSample smp;
  std::string sample_error;
  try {
    smp = sample(ctx.inst->model, cfg.n, beta0, seed);
  } catch (const Error& e) {
    sample_error = std::string(error_code_name(e.code()));
  }
  const SimulationTruth truth{beta0, smp.eps};
  DebiasOptions opts;
  opts.alpha = cfg.alpha;
  for (size_t k = 0; k < cfg.estimators.size(); ++k) {
    const EstimatorKind kind = cfg.estimators[k];
    ReplicateRow& r = rows[k];
    r = make_row(i, seed, g, kind);
    r.beta0_1 = beta0(0);
    if (!sample_error.empty()) {
      r.status = sample_error;
      continue;
    }
    try {
      const DebiasOutput out =
          kind == EstimatorKind::kKnown
              ? debias_known_sigma(smp.x, smp.y, ctx.inst->model, ctx.inst->direction,
                                   ctx.lambda_known, truth, opts)
              : debias_unknown_sigma(smp.x, smp.y, ctx.lambda_unknown, ctx.lambda_node, truth,
                                     opts);
      fill_row(r, out, beta0(0), cfg.n);
    } catch (const Error& e) {
      r.status = std::string(error_code_name(e.code()));
    }
  }
}

template <typename Fn>
void parallel_for(Index count, int threads, Fn&& fn) {
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(count)));
  if (workers == 1) {
    for (Index i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<Index> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (Index i = next++; i < count; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config) {
  if (config.replicates < 1) throw Error(ErrorCode::kInvalidArgument, "replicates must be >= 1");
  if (config.estimators.empty()) throw Error(ErrorCode::kInvalidArgument, "no estimator selected");
  if (config.n < 4) throw Error(ErrorCode::kInvalidArgument, "n must be at least 4");
  const ConstructionOutput inst = make_instance(config.instance);
  const Index p = inst.model.p;
  const double dn = static_cast<double>(config.n);
  const double logp = std::log(static_cast<double>(p));

  Context ctx;
  ctx.config = &config;
  ctx.inst = &inst;
  ctx.grid = beta0_grid(config, p);
  ctx.lambda_known = config.lambda_c * std::sqrt(logp / (dn / 2.0));
  ctx.lambda_unknown = config.lambda_c * std::sqrt(logp / dn);
  ctx.lambda_node =
      config.lambda_node_factor * lambda_eps_sharp(inst.model, inst.pair, config.t, config.n);

  const size_t e = config.estimators.size();
  std::vector<ReplicateRow> rows(static_cast<size_t>(config.replicates) * e);
  parallel_for(config.replicates, config.threads,
               [&](Index i) { run_replicate(ctx, i, &rows[static_cast<size_t>(i) * e]); });

  ExperimentReport rep;
  rep.rows = std::move(rows);
  rep.n = config.n;
  rep.p = p;
  rep.master_seed = config.master_seed;
  rep.theta11 = inst.model.theta11;
  rep.theta11_sharp = inst.direction.theta11_sharp;
  rep.improvement = inst.direction.improvement;
  rep.lambda_sharp = inst.pair.lambda_sharp;
  rep.crlb = std::numeric_limits<double>::quiet_NaN();
  if (config.model_class.kind == ClassKind::kL1 ||
      (config.model_class.kind == ClassKind::kL0 && p <= 22)) {
    ModelClass cls = config.model_class;
    cls.n = config.n;
    rep.crlb = crlb_compare(inst.model, inst.pair, inst.direction, cls).crlb;
  }
  rep.aggregates = aggregate_rows(rep.rows, rep.n, rep.theta11_sharp);
  return rep;
}

std::vector<EstimatorAggregate> aggregate_rows(const std::vector<ReplicateRow>& rows, Index n,
                                               double theta11_sharp) {
  std::vector<EstimatorAggregate> out;
  std::vector<std::string> names;
  for (const auto& r : rows) {
    if (std::find(names.begin(), names.end(), r.estimator) == names.end()) {
      names.push_back(r.estimator);
    }
  }
  const double rn = std::sqrt(static_cast<double>(n));
  for (const auto& name : names) {
    EstimatorAggregate a;
    a.estimator = name;
    std::vector<double> err;
    std::vector<double> stud;
    double covered = 0.0;
    double proxy = 0.0;
    double within = 0.0;
    double decomp = 0.0;
    double rem = 0.0;
    for (const auto& r : rows) {
      if (r.estimator != name) continue;
      if (r.status != "ok") {
        ++a.failed;
        continue;
      }
      ++a.ok;
      err.push_back(rn * (r.estimate - r.beta0_1));
      stud.push_back(r.studentized);
      covered += r.covered;
      proxy += r.variance_proxy;
      within += std::abs(r.variance_proxy - theta11_sharp) <= 0.15 * theta11_sharp ? 1.0 : 0.0;
      decomp += r.decomposition_ok;
      rem += r.remainder_bound_ok;
    }
    const double k = static_cast<double>(a.ok);
    a.failure_rate = static_cast<double>(a.failed) / static_cast<double>(a.ok + a.failed);
    if (a.ok > 0) {
      a.empirical_variance = sample_variance(err);
      a.mean_error = mean(err);
      a.coverage = covered / k;
      a.ks_distance = ks_distance_normal(stud);
      a.mean_variance_proxy = proxy / k;
      a.proxy_within_15pct = within / k;
      a.decomposition_pass_rate = decomp / k;
      a.remainder_bound_pass_rate = rem / k;
    }
    out.push_back(a);
  }
  return out;
}

namespace {

const char* kRowHeader =
    "replicate,seed,grid_index,estimator,status,beta0_1,estimate,variance_proxy,ci_low,ci_high,"
    "studentized,covered,linear_term,remainder,decomposition_ok,remainder_bound_ok";

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

}  // namespace

std::string rows_csv(const ExperimentReport& report) {
  std::ostringstream os;
  os << kRowHeader << '\n';
  for (const auto& r : report.rows) {
    os << r.replicate << ',' << r.seed << ',' << r.grid_index << ',' << r.estimator << ','
       << r.status << ',' << format_double(r.beta0_1) << ',' << format_double(r.estimate) << ','
       << format_double(r.variance_proxy) << ',' << format_double(r.ci_low) << ','
       << format_double(r.ci_high) << ',' << format_double(r.studentized) << ',' << r.covered
       << ',' << format_double(r.linear_term) << ',' << format_double(r.remainder) << ','
       << r.decomposition_ok << ',' << r.remainder_bound_ok << '\n';
  }
  return os.str();
}

std::vector<ReplicateRow> parse_rows_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != kRowHeader) {
    throw Error(ErrorCode::kParseError, "rows CSV header mismatch");
  }
  std::vector<ReplicateRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto c = split_csv_line(line);
    if (c.size() != 16) throw Error(ErrorCode::kParseError, "rows CSV: wrong column count");
    ReplicateRow r;
    r.replicate = std::stoll(c[0]);
    r.seed = std::stoull(c[1]);
    r.grid_index = std::stoll(c[2]);
    r.estimator = c[3];
    r.status = c[4];
    r.beta0_1 = std::stod(c[5]);
    r.estimate = std::stod(c[6]);
    r.variance_proxy = std::stod(c[7]);
    r.ci_low = std::stod(c[8]);
    r.ci_high = std::stod(c[9]);
    r.studentized = std::stod(c[10]);
    r.covered = std::stoi(c[11]);
    r.linear_term = std::stod(c[12]);
    r.remainder = std::stod(c[13]);
    r.decomposition_ok = std::stoi(c[14]);
    r.remainder_bound_ok = std::stoi(c[15]);
    rows.push_back(r);
  }
  return rows;
}

std::string aggregates_csv(const ExperimentReport& report) {
  std::ostringstream os;
  os << "estimator,ok,failed,failure_rate,empirical_variance,mean_error,coverage,ks_distance,"
        "mean_variance_proxy,proxy_within_15pct,decomposition_pass_rate,"
        "remainder_bound_pass_rate,n,p,master_seed,theta11,theta11_sharp,improvement,crlb,"
        "lambda_sharp\n";
  for (const auto& a : report.aggregates) {
    os << a.estimator << ',' << a.ok << ',' << a.failed << ',' << format_double(a.failure_rate)
       << ',' << format_double(a.empirical_variance) << ',' << format_double(a.mean_error) << ','
       << format_double(a.coverage) << ',' << format_double(a.ks_distance) << ','
       << format_double(a.mean_variance_proxy) << ',' << format_double(a.proxy_within_15pct)
       << ',' << format_double(a.decomposition_pass_rate) << ','
       << format_double(a.remainder_bound_pass_rate) << ',' << report.n << ',' << report.p << ','
       << report.master_seed << ',' << format_double(report.theta11) << ','
       << format_double(report.theta11_sharp) << ',' << format_double(report.improvement) << ','
       << format_double(report.crlb) << ',' << format_double(report.lambda_sharp) << '\n';
  }
  return os.str();
}

const AuditEntry* AuditReport::find(const std::string& name) const {
  for (const auto& e : entries) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

namespace {

class Tally {
 public:
  explicit Tally(std::string name) { e_.name = std::move(name); e_.worst_slack = std::numeric_limits<double>::infinity(); }
  void add(bool pass, double slack) {
    ++e_.checks;
    if (pass) ++e_.passes;
    e_.worst_slack = std::min(e_.worst_slack, slack);
  }
  AuditEntry entry() const {
    AuditEntry e = e_;
    if (e.checks == 0) e.worst_slack = 0.0;
    return e;
  }

 private:
  AuditEntry e_;
};

// Auxiliary instances with nonzero gamma_sharp and a non-identity design.
std::vector<ConstructionOutput> auxiliary_instances() {
  std::vector<ConstructionOutput> out;
  InstanceSpec spec;
  spec.sigma_minus = "ar1";
  spec.rho = 0.3;

  spec.construction = "direct";
  spec.p = 201;
  spec.s = 2;
  spec.gamma_sharp_value = 0.1;
  spec.improvement = 0.4;
  out.push_back(make_instance(spec));

  spec.construction = "reversed-irrep";
  out.push_back(make_instance(spec));

  spec.construction = "lagrangian";
  spec.p = 401;
  spec.s = 1;
  spec.improvement = 0.5;
  out.push_back(make_instance(spec));
  return out;
}

void audit_lemma22(const CovarianceModel& model, const EligiblePair& pair, Tally& t) {
  const SharpDirection d = sharp_direction(model, pair);
  const double lmin2 = model.lambda_min_sq;
  const double l1 = pair.l1_product;
  const double s1 = 2.0 * l1 / (d.denominator * d.denominator) -
                    std::abs(d.quad_form - d.theta11_sharp);
  const double s2 = model.theta11 + 2.0 * l1 / (lmin2 * lmin2) - d.theta11_sharp;
  const double s3 = d.lambda0_sharp - d.sup_residual;
  const double s4 = d.denominator - (lmin2 - 2.0 * l1);
  t.add(d.all_ok(), std::min(std::min(s1, s2), std::min(s3, s4)));
}

void audit_findpair(const ConstructionOutput& inst, Tally& chain, Tally& l2) {
  const CovarianceModel& model = inst.model;
  const EligiblePair& pair = inst.pair;
  const Matrix a = model.sigma_minus();
  for (double factor : {2.0, 3.0}) {
    const double ll = factor * pair.lambda_sharp;
    const LassoFit fit = population_lasso(model, ll);
    const Vector delta = fit.coef - pair.gamma_sharp;
    const double quad = delta.dot(a * delta);
    const double lhs = quad + (ll - pair.lambda_sharp) * fit.coef.lpNorm<1>();
    const double rhs = (ll + pair.lambda_sharp) * pair.gamma_sharp.lpNorm<1>();
    const double slack = std::max(fit.kkt_residual, 1e-8) * delta.lpNorm<1>() + 1e-12;
    chain.add(lhs <= rhs + slack, rhs + slack - lhs);
    const double bound = 3.0 * ll * pair.gamma_sharp.lpNorm<1>() + slack;
    l2.add(quad <= bound, bound - quad);
  }
}

}  // namespace

AuditReport audit_lemmas(const ExperimentConfig& config) {
  const ConstructionOutput inst = make_instance(config.instance);
  std::vector<ConstructionOutput> instances;
  instances.push_back(inst);
  for (auto& a : auxiliary_instances()) instances.push_back(std::move(a));

  Tally lemma22("lemma22_sharp_direction");
  Tally uniq("uniqueness_bound");
  Tally uniq_printed("uniqueness_printed_bound_informational");
  Tally findpair("findpair_chain");
  Tally findpair_l2("findpair_l2_bound");
  Tally antiproj("antiprojection_bound");
  Tally projects("projectS_bound");
  Tally slow("slow_rate_given_event");
  Tally lagr("lagrangian_identities");

  std::mt19937_64 rng(derive_seed(config.master_seed, 0xA0D17ULL));
  std::uniform_real_distribution<double> unif(-1.0, 1.0);

  for (size_t k = 0; k < instances.size(); ++k) {
    const ConstructionOutput& ci = instances[k];
    const CovarianceModel& model = ci.model;
    const Index m = model.p - 1;
    audit_lemma22(model, ci.pair, lemma22);
    const ProjectSCheck ps = projects_bound(model, ci.pair, ci.direction);
    if (ps.applicable) projects.add(ps.holds, ps.bound - ps.lhs);
    audit_findpair(ci, findpair, findpair_l2);

    // Randomised pairs at the same lambda: gamma = gamma0 - lambda A^{-1} u
    // with u a perturbation of z_hat = A(gamma0 - gamma_sharp)/lambda.
    const Matrix a = model.sigma_minus();
    const Eigen::LLT<Matrix> llt(a);
    const double lambda = ci.pair.lambda_sharp;
    const Vector zhat = a * (model.gamma0 - ci.pair.gamma_sharp) / lambda;
    const Index pairs = k == 0 ? config.audit_pairs : std::max<Index>(1, config.audit_pairs / 5);
    std::uniform_int_distribution<Index> coord(0, m - 1);
    for (Index r = 0; r < pairs; ++r) {
      Vector u = zhat.cwiseMax(-1.0).cwiseMin(1.0);
      const Index changes = 1 + static_cast<Index>(rng() % static_cast<std::uint64_t>(std::min<Index>(10, m)));
      for (Index c = 0; c < changes; ++c) u(coord(rng)) = unif(rng);
      const Vector gamma = model.gamma0 - lambda * llt.solve(u);
      const PairCheck chk = check_pair(model, gamma, lambda, ci.pair.l1_product + 1.0);
      if (!chk.linf_ok) continue;
      const PairDistance d = pair_distance(model, ci.pair, chk.pair);
      uniq.add(d.bound_holds, d.bound - d.distance);
      uniq_printed.add(d.distance <= d.reference_bound * (1.0 + 1e-9) + 1e-12,
                       d.reference_bound - d.distance);
      if (chk.pair.l1_product <= 0.05) {
        try {
          audit_lemma22(model, chk.pair, lemma22);
          const SharpDirection dir = sharp_direction(model, chk.pair);
          const ProjectSCheck pr = projects_bound(model, chk.pair, dir);
          if (pr.applicable) projects.add(pr.holds, pr.bound - pr.lhs);
        } catch (const Error&) {
          lemma22.add(false, -1.0);
        }
      }
    }

    // Antiprojection bound on random sets of size 3.
    const Index sets = std::min<Index>(20, std::max<Index>(1, config.audit_pairs / 25));
    for (Index r = 0; r < sets && m > 3; ++r) {
      IndexSet s;
      while (static_cast<Index>(s.size()) < 3) {
        const Index j = coord(rng);
        if (std::find(s.begin(), s.end(), j) == s.end()) s.push_back(j);
      }
      std::sort(s.begin(), s.end());
      const ProjectionResult pr = projection_pair(model, s);
      antiproj.add(pr.bound_holds, pr.v_bound - pr.v_exact);
    }

    auto it = ci.witness.scalars.find("constraint_residual");
    if (it != ci.witness.scalars.end()) {
      const double orth = ci.witness.scalars.at("orthogonality");
      const double orth_tol =
          1e-10 * std::max(1.0, ci.witness.vectors.at("c0").cwiseAbs().maxCoeff());
      const double cres = it->second;
      const double sup = ci.witness.scalars.at("sup_norm");
      const double sup_pred = ci.witness.scalars.at("sup_norm_closed_form");
      const double sup_gap = std::abs(sup - sup_pred) - 1e-9 * (1.0 + sup_pred);
      lagr.add(orth <= orth_tol && cres <= 1e-8 && sup_gap <= 0.0,
               std::min(std::min(orth_tol - orth, 1e-8 - cres), -sup_gap));
    }
  }

  // Slow-rate inequalities on node-wise fits of the configured instance.
  const double lam_eps = lambda_eps_sharp(inst.model, inst.pair, config.t, config.n);
  const double lam_node = config.lambda_node_factor * lam_eps;
  Index events = 0;
  const Vector beta0 = Vector::Zero(inst.model.p);
  for (Index r = 0; r < config.audit_replicates; ++r) {
    const std::uint64_t seed = derive_seed(config.master_seed ^ 0x5EEDULL, static_cast<std::uint64_t>(r));
    const DesignSample smp = sample(inst.model, config.n, beta0, seed);
    const NodewiseFit node = nodewise_lasso(smp.x, lam_node);
    const SlowRateCertificate c =
        slow_rate_certificate(smp.x, node.fit, inst.pair.gamma_sharp, lam_eps, lam_node);
    if (!c.event_c) continue;
    ++events;
    slow.add(c.ineq_a && c.ineq_b, std::min(c.rhs_a + c.slack - c.lhs_a, c.rhs_b - c.lhs_b));
  }

  AuditReport rep;
  for (const Tally* t : {&lemma22, &uniq, &uniq_printed, &findpair, &findpair_l2, &antiproj,
                         &projects, &slow, &lagr}) {
    rep.entries.push_back(t->entry());
  }
  rep.event_c_frequency = config.audit_replicates > 0
                              ? static_cast<double>(events) /
                                    static_cast<double>(config.audit_replicates)
                              : 0.0;
  // 2(p-1) one-sided events, each at level 2 exp(-(t + log p)).
  const double pd = static_cast<double>(inst.model.p);
  rep.event_c_floor = 1.0 - 4.0 * (pd - 1.0) / pd * std::exp(-config.t);
  return rep;
}

std::string audit_csv(const AuditReport& report) {
  std::ostringstream os;
  os << "audit,checks,passes,pass_rate,worst_slack\n";
  for (const auto& e : report.entries) {
    const double rate = e.checks ? static_cast<double>(e.passes) / static_cast<double>(e.checks) : 0.0;
    os << e.name << ',' << e.checks << ',' << e.passes << ',' << format_double(rate) << ','
       << format_double(e.worst_slack) << '\n';
  }
  os << "event_c_frequency,1,1," << format_double(report.event_c_frequency) << ','
     << format_double(report.event_c_frequency - report.event_c_floor) << '\n';
  return os.str();
}

bool re_probe_feasible(const CovarianceModel& model, const Vector& c, double l1_cap) {
  const double norm = std::sqrt(c.dot(model.sigma_minus() * c));
  return std::abs(norm - 1.0) <= 1e-9 && c.lpNorm<1>() <= l1_cap;
}

ReProbe re_eigenvalue_probe(const MatrixRef& x, const CovarianceModel& model, double lambda_node,
                            double eta, Index candidates, std::uint64_t seed) {
  const Index m = model.p - 1;
  const double n = static_cast<double>(x.rows());
  const MatrixRef rest = x.rightCols(m);
  ReProbe out;
  out.l1_cap = 4.0 * eta * eta / lambda_node;
  out.best_value = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<Index> coord(0, m - 1);
  auto value = [&](const Vector& c) { return (rest * c).squaredNorm() / n; };
  auto normalise = [&](Vector& c) { c /= std::sqrt(c.dot(model.sigma_minus() * c)); };

  for (Index k = 0; k < candidates; ++k) {
    ++out.candidates;
    const Index size = 1 + static_cast<Index>(rng() % static_cast<std::uint64_t>(std::min<Index>(5, m)));
    Vector c = Vector::Zero(m);
    for (Index i = 0; i < size; ++i) c(coord(rng)) = normal(rng);
    if (c.norm() == 0.0) continue;
    normalise(c);
    if (!re_probe_feasible(model, c, out.l1_cap)) continue;
    ++out.feasible_candidates;
    out.feasible_found = true;
    double v = value(c);
    // Local descent on the sphere within the support; steps that leave the
    // feasible set are rejected.
    double step = 0.1;
    for (int it = 0; it < 30; ++it) {
      Vector grad = 2.0 * rest.transpose() * (rest * c) / n;
      for (Index j = 0; j < m; ++j) {
        if (c(j) == 0.0) grad(j) = 0.0;
      }
      Vector trial = c - step * grad;
      if (trial.norm() == 0.0) break;
      normalise(trial);
      const double tv = value(trial);
      if (tv < v && re_probe_feasible(model, trial, out.l1_cap)) {
        c = trial;
        v = tv;
      } else {
        step *= 0.5;
      }
    }
    out.best_value = std::min(out.best_value, v);
  }
  out.at_least_half = out.best_value >= 0.5;
  return out;
}

ReProbe re_eigenvalue_probe(const ExperimentConfig& config) {
  const ConstructionOutput inst = make_instance(config.instance);
  const double lam_node =
      config.lambda_node_factor * lambda_eps_sharp(inst.model, inst.pair, config.t, config.n);
  const DesignSample smp = sample(inst.model, config.n, Vector::Zero(inst.model.p),
                                  derive_seed(config.master_seed, 0xE16E7ULL));
  return re_eigenvalue_probe(smp.x, inst.model, lam_node, config.re_eta, 200,
                             derive_seed(config.master_seed, 0xE16E8ULL));
}

void write_report_files(const std::string& dir, const ExperimentReport& report,
                        const AuditReport* audit) {
  auto write = [&](const std::string& name, const std::string& body) {
    std::ofstream out(dir + "/" + name);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + dir + "/" + name);
    out << body;
  };
  write("rows.csv", rows_csv(report));
  write("aggregates.csv", aggregates_csv(report));
  if (audit) write("audit.csv", audit_csv(*audit));
}

}  // namespace dlasso
