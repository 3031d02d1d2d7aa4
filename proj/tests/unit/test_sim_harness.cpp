#include <gtest/gtest.h>

#include "dlasso/error.h"
#include "dlasso/sim_harness.h"

using namespace dlasso;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.instance.construction = "direct";
  c.instance.p = 120;
  c.instance.improvement = 0.5;
  c.n = 100;
  c.replicates = 12;
  c.master_seed = 99;
  c.audit_replicates = 5;
  c.audit_pairs = 40;
  return c;
}

}  // namespace

TEST(MakeInstance, AllConstructions) {
  InstanceSpec spec;
  spec.p = 150;
  for (const char* kind : {"identity", "direct", "regression", "reversed-irrep", "lagrangian"}) {
    spec.construction = kind;
    spec.sigma_minus = std::string(kind) == "identity" ? "identity" : "ar1";
    spec.rho = 0.2;
    spec.improvement = 0.4;
    const ConstructionOutput c = make_instance(spec);
    EXPECT_EQ(c.model.p, 150) << kind;
    EXPECT_GE(c.direction.improvement, 0.0) << kind;
  }
  spec.construction = "nonsense";
  EXPECT_THROW(make_instance(spec), Error);
}

TEST(MakeSigmaMinus, Kinds) {
  const Matrix e = make_sigma_minus("equicorrelation", 3, 0.2);
  EXPECT_DOUBLE_EQ(e(0, 1), 0.2);
  EXPECT_DOUBLE_EQ(e(2, 2), 1.0);
  const Matrix a = make_sigma_minus("ar1", 4, 0.5);
  EXPECT_DOUBLE_EQ(a(0, 3), 0.125);
  EXPECT_THROW(make_sigma_minus("banded", 3, 0.1), Error);
}

TEST(Beta0Grid, ScalingAndFeasibility) {
  ExperimentConfig c = small_config();
  const auto grid = beta0_grid(c, 120);
  ASSERT_EQ(grid.size(), 2u);
  EXPECT_DOUBLE_EQ(grid[0](0), 1.0 / std::sqrt(100.0));
  EXPECT_DOUBLE_EQ(grid[1](1), 1.0);
  EXPECT_EQ(grid[1](2), 0.0);
  c.beta0.magnitudes = {100.0};
  c.beta0.scaled = {false};
  EXPECT_THROW(beta0_grid(c, 120), Error);
}

TEST(RunExperiment, ByteIdenticalRepeatsAndThreads) {
  ExperimentConfig c = small_config();
  c.replicates = 1;
  const std::string a = rows_csv(run_experiment(c));
  const std::string b = rows_csv(run_experiment(c));
  EXPECT_EQ(a, b);

  c.replicates = 9;
  c.threads = 1;
  const ExperimentReport serial = run_experiment(c);
  c.threads = 3;
  const ExperimentReport parallel = run_experiment(c);
  EXPECT_EQ(rows_csv(serial), rows_csv(parallel));
  EXPECT_EQ(aggregates_csv(serial), aggregates_csv(parallel));
}

TEST(RunExperiment, AggregatesRecomputableFromRows) {
  const ExperimentReport rep = run_experiment(small_config());
  const auto rows = parse_rows_csv(rows_csv(rep));
  ASSERT_EQ(rows.size(), rep.rows.size());
  const auto agg = aggregate_rows(rows, rep.n, rep.theta11_sharp);
  ASSERT_EQ(agg.size(), rep.aggregates.size());
  for (size_t k = 0; k < agg.size(); ++k) {
    EXPECT_EQ(agg[k].estimator, rep.aggregates[k].estimator);
    EXPECT_EQ(agg[k].ok, rep.aggregates[k].ok);
    EXPECT_NEAR(agg[k].empirical_variance, rep.aggregates[k].empirical_variance, 1e-12);
    EXPECT_NEAR(agg[k].coverage, rep.aggregates[k].coverage, 1e-12);
    EXPECT_NEAR(agg[k].ks_distance, rep.aggregates[k].ks_distance, 1e-12);
    EXPECT_NEAR(agg[k].mean_variance_proxy, rep.aggregates[k].mean_variance_proxy, 1e-12);
  }
  EXPECT_NEAR(rep.theta11, 2.0, 1e-10);
  EXPECT_NEAR(rep.theta11_sharp, 1.0, 1e-10);
}

TEST(RunExperiment, ReplicateFailuresAreRecorded) {
  ExperimentConfig c = small_config();
  c.n = 101;  // odd: the split-sample estimator rejects every replicate
  c.estimators = {EstimatorKind::kKnown};
  const ExperimentReport rep = run_experiment(c);
  ASSERT_EQ(rep.aggregates.size(), 1u);
  EXPECT_EQ(rep.aggregates[0].failed, c.replicates);
  EXPECT_DOUBLE_EQ(rep.aggregates[0].failure_rate, 1.0);
  EXPECT_EQ(rep.rows[0].status, "OddSampleSize");
}

TEST(RowsCsv, RejectsBadHeader) {
  EXPECT_THROW(parse_rows_csv("a,b\n1,2\n"), Error);
}

TEST(Audit, AllRegisteredInequalitiesPass) {
  const AuditReport rep = audit_lemmas(small_config());
  for (const auto& e : rep.entries) {
    if (e.name == "uniqueness_printed_bound_informational") continue;
    EXPECT_TRUE(e.all_pass()) << e.name << " " << e.passes << "/" << e.checks;
  }
  EXPECT_NE(rep.find("lagrangian_identities"), nullptr);
  EXPECT_EQ(rep.find("missing"), nullptr);
  EXPECT_GE(rep.event_c_frequency, rep.event_c_floor);
  EXPECT_NE(audit_csv(rep).find("findpair_chain"), std::string::npos);
}

TEST(ReProbe, WellConditionedIdentity) {
  const CovarianceModel m = build_model(Matrix::Identity(6, 6));
  const DesignSample s = sample(m, 5000, Vector::Zero(6), 3);
  const ReProbe r = re_eigenvalue_probe(s.x, m, 0.05, 0.5, 100, 4);
  EXPECT_TRUE(r.feasible_found);
  EXPECT_NEAR(r.best_value, 1.0, 0.1);
  EXPECT_TRUE(r.at_least_half);
  EXPECT_EQ(r.label, "heuristic");
}

TEST(ReProbe, HighDimensionalTinyEta) {
  ExperimentConfig c = small_config();
  c.instance.p = 400;
  c.n = 100;
  c.re_eta = 0.2;
  const ReProbe r = re_eigenvalue_probe(c);
  EXPECT_TRUE(r.at_least_half);
}

TEST(ReProbe, NullSpaceDirectionOutsideCapIsExcluded) {
  const CovarianceModel m = build_model(Matrix::Identity(4, 4));
  // Columns 1 and 2 are equal, so c = (1, -1, 0)/sqrt(2) lies in the null space.
  Matrix x(3, 4);
  x << 1, 1, 1, 0, 0, 2, 2, 1, 1, -1, -1, 3;
  Vector c(3);
  c << 1.0, -1.0, 0.0;
  c /= std::sqrt(2.0);
  EXPECT_NEAR((x.rightCols(3) * c).norm(), 0.0, 1e-15);
  EXPECT_FALSE(re_probe_feasible(m, c, 1.0));
  EXPECT_TRUE(re_probe_feasible(m, c, 2.0));
}
