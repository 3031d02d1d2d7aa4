#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

fs::path work_dir() {
  const fs::path d = fs::temp_directory_path() / "dlasso_cli_test";
  fs::create_directories(d);
  return d;
}

Result run(const std::string& args) {
  const fs::path out = work_dir() / "stdout.txt";
  const std::string cmd =
      std::string(DLASSO_CLI_PATH) + " " + args + " > " + out.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(out);
  std::stringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  return r;
}

std::string write_file(const std::string& name, const std::string& body) {
  const fs::path p = work_dir() / name;
  std::ofstream(p) << body;
  return p.string();
}

}  // namespace

TEST(Cli, HelpExitsZero) {
  EXPECT_EQ(run("--help").code, 0);
  for (const char* sub : {"construct", "simulate", "estimate", "crlb", "check-pair"}) {
    EXPECT_EQ(run(std::string(sub) + " --help").code, 0) << sub;
  }
}

TEST(Cli, ConstructDirectWritesFiles) {
  const fs::path out = work_dir() / "direct";
  fs::remove_all(out);
  const Result r = run("construct direct --p 500 --lambda-sharp 0.02 --seed 7 --out " + out.string());
  EXPECT_EQ(r.code, 0) << r.out;
  for (const char* f : {"sigma.csv", "pair.csv", "witness.csv", "gamma_sharp.csv"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
}

TEST(Cli, UnknownConstructionIsUsageError) {
  const Result r = run("construct bogus --out " + (work_dir() / "bogus").string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("Usage"), std::string::npos);
}

TEST(Cli, MarginViolationIsCertificationError) {
  const Result r =
      run("construct direct --p 500 --lambda-sharp 0.2 --out " + (work_dir() / "bad").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("MarginViolated"), std::string::npos);
}

TEST(Cli, RegressionNeedsSeed) {
  EXPECT_EQ(run("construct regression --p 50 --out " + (work_dir() / "reg").string()).code, 1);
  EXPECT_EQ(
      run("construct regression --p 50 --seed 3 --out " + (work_dir() / "reg").string()).code, 0);
}

TEST(Cli, CrlbBudgetZero) {
  const Result r = run("crlb --class l1 --budget 0");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("l1,0,1,"), std::string::npos) << r.out;
}

TEST(Cli, CheckPairIdentity) {
  const Result r = run("check-pair --identity-p 20 --lambda-sharp 0.01");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("\neligible,"), std::string::npos) << r.out;
}

TEST(Cli, EstimateOnConstructedData) {
  const fs::path out = work_dir() / "est";
  fs::remove_all(out);
  ASSERT_EQ(run("construct direct --p 60 --improvement 0.4 --seed 5 --sample-n 80 --out " +
                out.string())
                .code,
            0);
  const std::string xs = (out / "x.csv").string();
  const std::string ys = (out / "y.csv").string();
  Result r = run("estimate --x " + xs + " --y " + ys);
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 2);
  r = run("estimate --estimator known --instance " + out.string() + " --x " + xs + " --y " + ys);
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.out.rfind("estimator,", 0), 0u);
}

TEST(Cli, SimulateBundledConfig) {
  const fs::path out = work_dir() / "sim";
  fs::remove_all(out);
  const Result r = run("simulate " + std::string(DLASSO_SOURCE_DIR) +
                       "/configs/example.ini --seed 4242 --out " + out.string());
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("known_sigma"), std::string::npos);
  EXPECT_NE(r.out.find("master_seed=4242"), std::string::npos);
  std::ifstream agg(out / "aggregates.csv");
  std::stringstream ss;
  ss << agg.rdbuf();
  EXPECT_NE(ss.str().find(",4242,"), std::string::npos);
  EXPECT_TRUE(fs::exists(out / "rows.csv"));
  EXPECT_TRUE(fs::exists(out / "audit.csv"));
}

TEST(Cli, SimulateMalformedConfig) {
  const std::string cfg = write_file("bad.ini", "[experiment]\nreplicates = lots\n");
  EXPECT_EQ(run("simulate " + cfg + " --out " + (work_dir() / "s2").string()).code, 1);
  const std::string noseed = write_file("noseed.ini", "[experiment]\nreplicates = 2\n");
  EXPECT_EQ(run("simulate " + noseed + " --out " + (work_dir() / "s3").string()).code, 1);
}

TEST(Cli, SimulateReportsRuntimeFailures) {
  const std::string cfg = write_file("odd.ini",
                                     "[instance]\np = 50\n[experiment]\nn = 41\nreplicates = 3\n"
                                     "estimators = known\nmaster_seed = 1\n");
  EXPECT_EQ(run("simulate " + cfg + " --no-audit --out " + (work_dir() / "s4").string()).code, 3);
}
