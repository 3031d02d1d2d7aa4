#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dlasso/constructions.h"
#include "dlasso/crlb.h"
#include "dlasso/debias.h"

namespace dlasso {

/// Which population design an experiment runs on.
struct InstanceSpec {
  /// identity | direct | regression | reversed-irrep | lagrangian
  std::string construction = "direct";
  Index p = 200;
  /// Sigma_{-1,-1}: identity | equicorrelation | ar1
  std::string sigma_minus = "identity";
  double rho = 0.0;
  /// lambda_sharp; when <= 0 it is derived from `improvement` (direct) or
  /// from the tail bound (regression).
  double lambda_sharp = 0.0;
  /// Target lambda^2 z'A^{-1}z for the direct construction.
  double improvement = 0.5;
  /// Size of S (gamma_sharp support) for reversed-irrep and lagrangian.
  Index s = 1;
  /// Nonzero value of gamma_sharp on S.
  double gamma_sharp_value = 0.0;
  /// Regression construction: N and tail level t.
  Index big_n = 0;
  double t = 3.0;
  std::uint64_t seed = 1;
  ConstructionOptions options;
};

Matrix make_sigma_minus(const std::string& kind, Index dim, double rho);

/// Builds the certified instance described by `spec`. The identity
/// construction returns Sigma = I with gamma_sharp = 0.
ConstructionOutput make_instance(const InstanceSpec& spec);

enum class EstimatorKind { kKnown, kUnknown };

struct Beta0Policy {
  Index s0 = 2;
  /// Magnitudes; a value v with `scaled` set means v / sqrt(n).
  std::vector<double> magnitudes = {1.0, 1.0};
  std::vector<bool> scaled = {true, false};
  /// Every grid vector must satisfy ||beta0||_r^r <= (1 - eta) * budget.
  double eta = 0.5;
};

struct ExperimentConfig {
  InstanceSpec instance;
  ModelClass model_class;
  Index n = 1000;
  Index replicates = 100;
  std::vector<EstimatorKind> estimators = {EstimatorKind::kKnown, EstimatorKind::kUnknown};
  /// lambda = lambda_c * sqrt(log p / m) with m the size of the data the
  /// Lasso sees.
  double lambda_c = 1.1;
  /// lambda_node = lambda_node_factor * lambda_eps_sharp(t).
  double lambda_node_factor = 2.0;
  double t = 3.0;
  double alpha = 0.05;
  Beta0Policy beta0;
  std::uint64_t master_seed = 1;
  /// Set by the config parser when master_seed was given explicitly.
  bool master_seed_set = false;
  int threads = 1;
  /// Replicates used by the data-driven audits.
  Index audit_replicates = 50;
  /// Randomised pairs per audit.
  Index audit_pairs = 500;
  /// eta_n in the restricted-eigenvalue probe.
  double re_eta = 0.5;
};

/// beta0 vectors of the grid, each checked against the model class.
std::vector<Vector> beta0_grid(const ExperimentConfig& config, Index p);

struct ReplicateRow {
  Index replicate = 0;
  std::uint64_t seed = 0;
  Index grid_index = 0;
  std::string estimator;
  std::string status;  // "ok" or the error code name
  double beta0_1 = 0.0;
  double estimate = 0.0;
  double variance_proxy = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double studentized = 0.0;
  int covered = 0;
  double linear_term = 0.0;
  double remainder = 0.0;
  int decomposition_ok = 0;
  int remainder_bound_ok = 0;
};

struct EstimatorAggregate {
  std::string estimator;
  Index ok = 0;
  Index failed = 0;
  double failure_rate = 0.0;
  /// Sample variance of sqrt(n)(estimate - beta0_1).
  double empirical_variance = 0.0;
  double mean_error = 0.0;
  double coverage = 0.0;
  double ks_distance = 0.0;
  double mean_variance_proxy = 0.0;
  /// Fraction with |variance_proxy - theta11_sharp| <= 0.15 theta11_sharp.
  double proxy_within_15pct = 0.0;
  double decomposition_pass_rate = 0.0;
  double remainder_bound_pass_rate = 0.0;
};

struct ExperimentReport {
  std::vector<ReplicateRow> rows;
  std::vector<EstimatorAggregate> aggregates;
  Index n = 0;
  Index p = 0;
  std::uint64_t master_seed = 0;
  double theta11 = 0.0;
  double theta11_sharp = 0.0;
  double improvement = 0.0;
  double crlb = 0.0;
  double lambda_sharp = 0.0;
};

ExperimentReport run_experiment(const ExperimentConfig& config);

/// Aggregates recomputed from rows only.
std::vector<EstimatorAggregate> aggregate_rows(const std::vector<ReplicateRow>& rows, Index n,
                                               double theta11_sharp);

std::string rows_csv(const ExperimentReport& report);
std::string aggregates_csv(const ExperimentReport& report);
std::vector<ReplicateRow> parse_rows_csv(const std::string& text);

struct AuditEntry {
  std::string name;
  Index checks = 0;
  Index passes = 0;
  /// Minimum of (bound - value) over all checks; negative means a failure.
  double worst_slack = 0.0;
  bool all_pass() const { return checks > 0 && passes == checks; }
};

struct AuditReport {
  std::vector<AuditEntry> entries;
  double event_c_frequency = 0.0;
  /// 1 - 4 (p-1)/p exp(-t): the union-bound floor for the event frequency
  /// at lambda_eps_sharp(t) with its log p adjustment.
  double event_c_floor = 0.0;
  const AuditEntry* find(const std::string& name) const;
};

AuditReport audit_lemmas(const ExperimentConfig& config);
std::string audit_csv(const AuditReport& report);

struct ReProbe {
  /// Smallest ||X_{-1}c||^2/n found over feasible directions.
  double best_value = 0.0;
  bool feasible_found = false;
  bool at_least_half = false;
  /// lambda_node * ||c||_1 <= 4 eta^2 expressed as ||c||_1 <= l1_cap.
  double l1_cap = 0.0;
  Index candidates = 0;
  Index feasible_candidates = 0;
  /// Always "heuristic": no certificate is produced.
  std::string label = "heuristic";
};

/// Randomised search; see ReProbe. `x` is the full design (column 0 is x_1).
ReProbe re_eigenvalue_probe(const MatrixRef& x, const CovarianceModel& model, double lambda_node,
                            double eta, Index candidates, std::uint64_t seed);
ReProbe re_eigenvalue_probe(const ExperimentConfig& config);

/// True iff ||A^{1/2} c||_2 = 1 (within 1e-9) and ||c||_1 <= l1_cap.
bool re_probe_feasible(const CovarianceModel& model, const Vector& c, double l1_cap);

std::string estimator_name(EstimatorKind kind);

/// Writes rows.csv, aggregates.csv and audit.csv into `dir`.
void write_report_files(const std::string& dir, const ExperimentReport& report,
                        const AuditReport* audit);

}  // namespace dlasso
