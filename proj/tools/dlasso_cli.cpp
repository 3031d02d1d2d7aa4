// Command-line front end for the dlasso library.
//
// Exit codes: 0 success, 1 usage or parse error, 2 certification failure,
// 3 runtime failure (simulate: more than 5% of replicates failed).

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "dlasso/config.h"
#include "dlasso/crlb.h"
#include "dlasso/debias.h"
#include "dlasso/error.h"
#include "dlasso/matrix_io.h"
#include "dlasso/sim_harness.h"
#include "dlasso/tail_bounds.h"

namespace fs = std::filesystem;
using namespace dlasso;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitCertification = 2;
constexpr int kExitRuntime = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_dir(const std::string& dir) {
  if (dir.empty()) throw UsageError("--out is required");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw UsageError("cannot create output directory " + dir);
}

void require_file(const std::string& path) {
  if (!fs::is_regular_file(path)) throw UsageError("no such file: " + path);
}

void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  out << body;
}

std::map<std::string, double> read_key_values(const std::string& path) {
  require_file(path);
  std::ifstream in(path);
  std::map<std::string, double> out;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    if (comma == std::string::npos) continue;
    out[line.substr(0, comma)] = std::stod(line.substr(comma + 1));
  }
  return out;
}

std::string pair_csv(const ConstructionOutput& c) {
  std::ostringstream os;
  os << "key,value\n";
  os << "p," << c.model.p << '\n';
  os << "lambda_sharp," << format_double(c.pair.lambda_sharp) << '\n';
  os << "linf_residual," << format_double(c.pair.linf_residual) << '\n';
  os << "l1_product," << format_double(c.pair.l1_product) << '\n';
  os << "gamma_sharp_l1," << format_double(c.pair.gamma_sharp.lpNorm<1>()) << '\n';
  os << "theta11," << format_double(c.model.theta11) << '\n';
  os << "theta11_sharp," << format_double(c.direction.theta11_sharp) << '\n';
  os << "improvement," << format_double(c.direction.improvement) << '\n';
  os << "lambda0_sharp," << format_double(c.direction.lambda0_sharp) << '\n';
  os << "lambda_min_sq," << format_double(c.model.lambda_min_sq) << '\n';
  return os.str();
}

std::string witness_csv(const Witness& w) {
  std::ostringstream os;
  os << "name,index,value\n";
  for (const auto& [k, v] : w.scalars) os << k << ",," << format_double(v) << '\n';
  for (const auto& [k, v] : w.vectors) {
    for (Index i = 0; i < v.size(); ++i) os << k << ',' << i << ',' << format_double(v(i)) << '\n';
  }
  return os.str();
}

// Model, pair and direction from a directory written by `construct`.
struct LoadedInstance {
  CovarianceModel model;
  EligiblePair pair;
  SharpDirection direction;
};

LoadedInstance load_instance(const std::string& dir) {
  require_file(dir + "/sigma.csv");
  require_file(dir + "/gamma_sharp.csv");
  LoadedInstance li;
  li.model = build_model(read_symmetric_matrix(dir + "/sigma.csv"));
  const auto kv = read_key_values(dir + "/pair.csv");
  const auto it = kv.find("lambda_sharp");
  if (it == kv.end()) throw UsageError(dir + "/pair.csv has no lambda_sharp row");
  li.pair = certify_pair(li.model, read_csv_vector(dir + "/gamma_sharp.csv"), it->second, 1.0);
  li.direction = sharp_direction(li.model, li.pair);
  return li;
}

struct ConstructArgs {
  std::string name;
  InstanceSpec spec;
  std::optional<std::uint64_t> seed;
  Index sample_n = 0;
  std::string out;
};

int cmd_construct(ConstructArgs& a) {
  static const char* kNames[] = {"regression", "direct", "reversed-irrep", "lagrangian"};
  if (std::find(std::begin(kNames), std::end(kNames), a.name) == std::end(kNames)) {
    throw UsageError("unknown construction '" + a.name +
                     "' (expected regression, direct, reversed-irrep or lagrangian)");
  }
  if ((a.name == "regression" || a.sample_n > 0) && !a.seed) {
    throw UsageError("--seed is required for randomised constructions and --sample-n");
  }
  require_dir(a.out);
  a.spec.construction = a.name;
  if (a.seed) a.spec.seed = *a.seed;
  const ConstructionOutput c = make_instance(a.spec);
  write_csv_matrix(a.out + "/sigma.csv", c.model.sigma);
  write_csv_vector(a.out + "/gamma_sharp.csv", c.pair.gamma_sharp);
  write_text(a.out + "/pair.csv", pair_csv(c));
  write_text(a.out + "/witness.csv", witness_csv(c.witness));
  if (a.sample_n > 0) {
    const DesignSample s = sample(c.model, a.sample_n, Vector::Zero(c.model.p), *a.seed);
    write_csv_matrix(a.out + "/x.csv", s.x);
    write_csv_vector(a.out + "/y.csv", s.y);
  }
  std::cout << pair_csv(c);
  return kExitOk;
}

struct SimulateArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool no_audit = false;
};

int cmd_simulate(const SimulateArgs& a) {
  require_file(a.config);
  ExperimentConfig cfg;
  try {
    cfg = parse_config_file(a.config);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (a.seed) {
    cfg.master_seed = *a.seed;
    cfg.master_seed_set = true;
  }
  if (!cfg.master_seed_set) throw UsageError("a seed is required: set master_seed or --seed");
  if (a.threads) cfg.threads = *a.threads;
  require_dir(a.out);
  const ExperimentReport rep = run_experiment(cfg);
  std::optional<AuditReport> audit;
  if (!a.no_audit) audit = audit_lemmas(cfg);
  write_report_files(a.out, rep, audit ? &*audit : nullptr);

  std::printf("p=%lld n=%lld master_seed=%llu theta11=%.6g theta11_sharp=%.6g crlb=%.6g\n",
              static_cast<long long>(rep.p), static_cast<long long>(rep.n),
              static_cast<unsigned long long>(rep.master_seed), rep.theta11, rep.theta11_sharp,
              rep.crlb);
  std::printf("%-14s %6s %6s %10s %10s %10s %10s %10s\n", "estimator", "ok", "failed", "variance",
              "coverage", "ks", "proxy", "proxy15");
  bool too_many_failures = false;
  for (const auto& g : rep.aggregates) {
    std::printf("%-14s %6lld %6lld %10.4f %10.4f %10.4f %10.4f %10.4f\n", g.estimator.c_str(),
                static_cast<long long>(g.ok), static_cast<long long>(g.failed),
                g.empirical_variance, g.coverage, g.ks_distance, g.mean_variance_proxy,
                g.proxy_within_15pct);
    if (g.failure_rate > 0.05) too_many_failures = true;
  }
  if (audit) {
    for (const auto& e : audit->entries) {
      std::printf("audit %-40s %lld/%lld worst_slack=%.3g\n", e.name.c_str(),
                  static_cast<long long>(e.passes), static_cast<long long>(e.checks),
                  e.worst_slack);
    }
    std::printf("audit event_c_frequency=%.4f floor=%.4f\n", audit->event_c_frequency,
                audit->event_c_floor);
  }
  if (too_many_failures) {
    std::cerr << "error: more than 5% of replicates failed\n";
    return kExitRuntime;
  }
  return kExitOk;
}

struct EstimateArgs {
  std::string x;
  std::string y;
  std::string estimator = "unknown";
  std::string instance;
  double lambda = 0.0;
  double lambda_c = 1.1;
  double lambda_node = 0.0;
  double lambda_node_factor = 2.0;
  double t = 3.0;
  double alpha = 0.05;
};

int cmd_estimate(const EstimateArgs& a) {
  require_file(a.x);
  require_file(a.y);
  if (a.estimator != "known" && a.estimator != "unknown") {
    throw UsageError("--estimator must be known or unknown");
  }
  if (a.estimator == "known" && a.instance.empty()) {
    throw UsageError("--estimator known needs --instance");
  }
  const Matrix x = read_csv_matrix(a.x);
  const Vector y = read_csv_vector(a.y);
  if (x.rows() != y.size()) throw UsageError("x and y have different row counts");
  const Index n = x.rows();
  const Index p = x.cols();
  std::optional<LoadedInstance> inst;
  if (!a.instance.empty()) {
    inst = load_instance(a.instance);
    if (inst->model.p != p) throw UsageError("instance dimension does not match x");
  }
  DebiasOptions opts;
  opts.alpha = a.alpha;
  const double logp = std::log(static_cast<double>(p));
  DebiasOutput out;
  if (a.estimator == "known") {
    const double lambda =
        a.lambda > 0.0 ? a.lambda : a.lambda_c * std::sqrt(logp / (static_cast<double>(n) / 2.0));
    out = debias_known_sigma(x, y, inst->model, inst->direction, lambda, std::nullopt, opts);
  } else {
    const double lambda =
        a.lambda > 0.0 ? a.lambda : a.lambda_c * std::sqrt(logp / static_cast<double>(n));
    double lambda_node = a.lambda_node;
    if (!(lambda_node > 0.0)) {
      const double base =
          inst ? lambda_eps_sharp(inst->model, inst->pair, a.t, n)
               : inner_product_tail(static_cast<double>(n), union_bound_t(a.t, double(p - 1)));
      lambda_node = a.lambda_node_factor * base;
    }
    out = debias_unknown_sigma(x, y, lambda, lambda_node, std::nullopt, opts);
  }
  std::cout << "estimator,estimate,variance_proxy,ci_low,ci_high,lambda,lambda_node,n,p\n";
  std::cout << a.estimator << ',' << format_double(out.estimate) << ','
            << format_double(out.variance_proxy) << ',' << format_double(out.ci_low) << ','
            << format_double(out.ci_high) << ',' << format_double(out.lambda) << ','
            << format_double(out.lambda_node) << ',' << n << ',' << p << '\n';
  return kExitOk;
}

struct CrlbArgs {
  std::string cls = "l1";
  std::optional<double> budget;
  double r = 1.0;
  double s = 1.0;
  Index n = 1;
  double m = 1.0;
  std::string instance;
  std::string sigma;
  Index p = 10;
};

int cmd_crlb(const CrlbArgs& a) {
  ModelClass mc;
  if (a.cls == "l0") {
    mc.kind = ClassKind::kL0;
  } else if (a.cls == "l1") {
    mc.kind = ClassKind::kL1;
  } else if (a.cls == "lr") {
    mc.kind = ClassKind::kLr;
  } else {
    throw UsageError("--class must be l0, l1 or lr");
  }
  mc.r = mc.kind == ClassKind::kL0 ? 0.0 : (mc.kind == ClassKind::kL1 ? 1.0 : a.r);
  mc.s = a.s;
  mc.n = a.n;
  mc.m = a.m;
  if (a.budget) {
    if (*a.budget < 0.0) throw UsageError("--budget must be nonnegative");
    if (mc.kind == ClassKind::kL0) {
      mc.s = *a.budget;
    } else {
      mc.s = 1.0;
      mc.n = 1;
      mc.m = *a.budget;
    }
  }
  CovarianceModel model;
  EligiblePair pair;
  SharpDirection direction;
  if (!a.instance.empty()) {
    LoadedInstance li = load_instance(a.instance);
    model = std::move(li.model);
    pair = std::move(li.pair);
    direction = std::move(li.direction);
  } else {
    if (!a.sigma.empty()) {
      require_file(a.sigma);
      model = build_model(read_symmetric_matrix(a.sigma));
    } else {
      if (a.p < 2) throw UsageError("--p must be at least 2");
      model = build_model(Matrix::Identity(a.p, a.p));
    }
    // gamma_sharp = gamma0 has zero sup-norm residual, so any small lambda works.
    pair = certify_pair(model, model.gamma0, 1e-12, 1.0);
    direction = sharp_direction(model, pair);
  }
  const CrlbReport rep = crlb_compare(model, pair, direction, mc);
  std::cout << "class,budget,bound,bracket_low,bracket_high,theta11,theta11_sharp,verdict\n";
  std::cout << rep.class_name << ',' << format_double(rep.budget) << ','
            << format_double(rep.crlb) << ',' << format_double(rep.bracket_low) << ','
            << format_double(rep.bracket_high) << ',' << format_double(rep.theta11) << ','
            << format_double(rep.theta11_sharp) << ',' << rep.verdict << '\n';
  return kExitOk;
}

struct CheckPairArgs {
  std::string instance;
  std::string sigma;
  Index p = 0;
  std::string gamma_sharp;
  std::optional<double> lambda_sharp;
  double eps_eligible = 0.05;
};

int cmd_check_pair(const CheckPairArgs& a) {
  CovarianceModel model;
  std::optional<double> lambda = a.lambda_sharp;
  if (!a.instance.empty()) {
    require_file(a.instance + "/sigma.csv");
    model = build_model(read_symmetric_matrix(a.instance + "/sigma.csv"));
    if (!lambda) lambda = read_key_values(a.instance + "/pair.csv").at("lambda_sharp");
  } else if (!a.sigma.empty()) {
    require_file(a.sigma);
    model = build_model(read_symmetric_matrix(a.sigma));
  } else if (a.p >= 2) {
    model = build_model(Matrix::Identity(a.p, a.p));
  } else {
    throw UsageError("one of --instance, --sigma or --identity-p is required");
  }
  if (!lambda) throw UsageError("--lambda-sharp is required");
  std::string gpath = a.gamma_sharp;
  if (gpath.empty() && !a.instance.empty()) gpath = a.instance + "/gamma_sharp.csv";
  Vector g = Vector::Zero(model.p - 1);
  if (!gpath.empty()) {
    require_file(gpath);
    g = read_csv_vector(gpath);
    if (g.size() != model.p - 1) throw UsageError("gamma_sharp has the wrong length");
  }
  const PairCheck chk = check_pair(model, g, *lambda, a.eps_eligible);
  double theta11_sharp = std::numeric_limits<double>::quiet_NaN();
  if (chk.eligible()) theta11_sharp = sharp_direction(model, chk.pair).theta11_sharp;
  std::cout << "status,linf_residual,lambda_sharp,l1_product,eps_eligible,theta11,theta11_sharp\n";
  std::cout << (chk.eligible() ? "eligible" : "not eligible") << ','
            << format_double(chk.pair.linf_residual) << ',' << format_double(*lambda) << ','
            << format_double(chk.pair.l1_product) << ',' << format_double(a.eps_eligible) << ','
            << format_double(model.theta11) << ',' << format_double(theta11_sharp) << '\n';
  if (!chk.eligible()) {
    std::cerr << "error: pair is not eligible ("
              << (chk.linf_ok ? "l1 product above the cap" : "sup-norm residual above lambda")
              << ")\n";
    return kExitCertification;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Debiased Lasso with eligible-pair directions"};
  app.require_subcommand(1);

  ConstructArgs ca;
  auto* construct = app.add_subcommand("construct", "Build and certify a covariance instance");
  construct->add_option("construction", ca.name,
                        "regression | direct | reversed-irrep | lagrangian")
      ->required();
  construct->add_option("--p", ca.spec.p, "Dimension p")->capture_default_str();
  construct->add_option("--sigma-minus", ca.spec.sigma_minus,
                        "Sigma_{-1,-1}: identity | equicorrelation | ar1")
      ->capture_default_str();
  construct->add_option("--rho", ca.spec.rho, "Correlation parameter of sigma-minus");
  construct->add_option("--lambda-sharp", ca.spec.lambda_sharp,
                        "lambda_sharp (derived from --improvement when omitted)");
  construct->add_option("--improvement", ca.spec.improvement, "Target quadratic improvement")
      ->capture_default_str();
  construct->add_option("--s", ca.spec.s, "Size of the set S")->capture_default_str();
  construct->add_option("--gamma-sharp-value", ca.spec.gamma_sharp_value,
                        "Value of gamma_sharp on its support");
  construct->add_option("--big-n", ca.spec.big_n, "N for the regression construction");
  construct->add_option("--t", ca.spec.t, "Tail level t")->capture_default_str();
  construct->add_option("--margin", ca.spec.options.margin, "Certification margin")
      ->capture_default_str();
  construct->add_option("--eps-eligible", ca.spec.options.eps_eligible,
                        "Cap on lambda_sharp ||gamma_sharp||_1")
      ->capture_default_str();
  construct->add_option("--seed", ca.seed, "RNG seed");
  construct->add_option("--sample-n", ca.sample_n, "Also write x.csv and y.csv with n rows");
  construct->add_option("--out", ca.out, "Output directory")->required();

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "Run a Monte Carlo experiment and audits");
  simulate->add_option("config", sa.config, "Experiment config file")->required();
  simulate->add_option("--out", sa.out, "Output directory")->required();
  simulate->add_option("--seed", sa.seed, "Override master_seed");
  simulate->add_option("--threads", sa.threads, "Worker threads");
  simulate->add_flag("--no-audit", sa.no_audit, "Skip the lemma audits");

  EstimateArgs ea;
  auto* estimate = app.add_subcommand("estimate", "Debiased estimate of beta_1 from data");
  estimate->add_option("--x", ea.x, "Design matrix CSV")->required();
  estimate->add_option("--y", ea.y, "Response CSV")->required();
  estimate->add_option("--estimator", ea.estimator, "known | unknown")->capture_default_str();
  estimate->add_option("--instance", ea.instance, "Directory written by construct");
  estimate->add_option("--lambda", ea.lambda, "Lasso penalty (default lambda-c sqrt(log p/m))");
  estimate->add_option("--lambda-c", ea.lambda_c, "Penalty constant")->capture_default_str();
  estimate->add_option("--lambda-node", ea.lambda_node, "Node-wise penalty");
  estimate->add_option("--lambda-node-factor", ea.lambda_node_factor,
                       "Node-wise penalty multiple of the noise level")
      ->capture_default_str();
  estimate->add_option("--t", ea.t, "Tail level t")->capture_default_str();
  estimate->add_option("--alpha", ea.alpha, "CI level 1 - alpha")->capture_default_str();

  CrlbArgs ra;
  auto* crlb = app.add_subcommand("crlb", "Cramer-Rao bound over a model class");
  crlb->add_option("--class", ra.cls, "l0 | l1 | lr")->capture_default_str();
  crlb->add_option("--budget", ra.budget, "Budget (overrides --s/--n/--m)");
  crlb->add_option("--r", ra.r, "Exponent for the lr class");
  crlb->add_option("--s", ra.s, "Sparsity s");
  crlb->add_option("--n", ra.n, "Sample size n");
  crlb->add_option("--m", ra.m, "Multiplier M");
  crlb->add_option("--instance", ra.instance, "Directory written by construct");
  crlb->add_option("--sigma", ra.sigma, "Covariance matrix file");
  crlb->add_option("--p", ra.p, "Identity model dimension when no matrix is given")
      ->capture_default_str();

  CheckPairArgs pa;
  auto* check = app.add_subcommand("check-pair", "Check eligibility of (gamma_sharp, lambda)");
  check->add_option("--instance", pa.instance, "Directory written by construct");
  check->add_option("--sigma", pa.sigma, "Covariance matrix file");
  check->add_option("--identity-p", pa.p, "Use the p x p identity");
  check->add_option("--gamma-sharp", pa.gamma_sharp, "gamma_sharp CSV (default zero)");
  check->add_option("--lambda-sharp", pa.lambda_sharp, "lambda_sharp");
  check->add_option("--eps-eligible", pa.eps_eligible, "Cap on lambda ||gamma_sharp||_1")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*construct) return cmd_construct(ca);
    if (*simulate) return cmd_simulate(sa);
    if (*estimate) return cmd_estimate(ea);
    if (*crlb) return cmd_crlb(ra);
    if (*check) return cmd_check_pair(pa);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what();
    if (!std::isnan(e.value())) std::cerr << " (value " << format_double(e.value()) << ")";
    std::cerr << '\n';
    if (is_certification_error(e.code())) return kExitCertification;
    if (e.code() == ErrorCode::kParseError || e.code() == ErrorCode::kInvalidArgument ||
        e.code() == ErrorCode::kIoError || e.code() == ErrorCode::kDimensionTooLarge) {
      return kExitUsage;
    }
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
