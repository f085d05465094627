#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "json.hpp"

namespace ogl::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct Invocation {
  int code = 0;
  std::string out;
  std::string err;
};

Invocation invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Invocation r;
  r.code = run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::vector<std::string> sliding(std::vector<std::string> head, const std::string& os = "2") {
  std::vector<std::string> tail{"--gen", "sliding", "--N", "12", "--gs", "5", "--os", os,
                                "--seed", "4", "--admm-tau", "10"};
  head.insert(head.end(), tail.begin(), tail.end());
  return head;
}

struct CsvSummary {
  int rows = 0;
  int true_zero = -1;
  int lasso = -1;
  int ogn = -1;
};

CsvSummary read_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "group,weight,beta_norm,ogn_norm,lasso_zero,ogn_zero");
  CsvSummary s;
  while (std::getline(in, line)) {
    if (line.rfind("total,,,", 0) == 0) {
      std::istringstream fields(line.substr(8));
      char comma;
      fields >> s.true_zero >> comma >> s.lasso >> comma >> s.ogn;
    } else {
      ++s.rows;
    }
  }
  return s;
}

class TempDir {
 public:
  TempDir()
      : path_(fs::temp_directory_path() /
              ("ogl_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()))) {
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

TEST(Cli, SolveReportSchema) {
  const Invocation r = invoke(sliding({"solve", "--solver", "admm"}));
  ASSERT_EQ(r.code, kConverged) << r.err;
  const json report = json::parse(r.out);
  EXPECT_EQ(report["schema"], 1);
  EXPECT_EQ(report["seed"], 4);
  EXPECT_EQ(report["config"]["solver"], "admm");
  EXPECT_EQ(report["problem"]["n"], 12 * 5 - 11 * 2);
  EXPECT_TRUE(report["problem"]["overlapping"].get<bool>());
  for (const char* key : {"converged", "iterations", "objective", "residual", "support_size",
                          "active_groups", "kappa"}) {
    EXPECT_TRUE(report["result"].contains(key)) << key;
  }
  EXPECT_FALSE(report["result"].contains("kkt"));
}

TEST(Cli, SolveWithAdaDropsWritesTraceAndRounds) {
  TempDir dir;
  const std::string prefix = dir / "run";
  const Invocation r = invoke(sliding({"solve", "--solver", "admm", "--adadrops", "ogn", "--init-size", "2",
                                "--growth-cap", "3", "--out", prefix}));
  ASSERT_EQ(r.code, kConverged) << r.err;
  const json report = json::parse(r.out);
  ASSERT_TRUE(report.contains("rounds"));
  EXPECT_EQ(report["config"]["growth_cap"], 3);

  std::ifstream trace(prefix + ".trace.jsonl");
  std::string line;
  json last;
  int lines = 0;
  while (std::getline(trace, line)) {
    last = json::parse(line);
    ++lines;
    EXPECT_LE(last["kappa"].get<int>(), 38);
  }
  EXPECT_GT(lines, 0);
  EXPECT_DOUBLE_EQ(last["obj"].get<double>(), report["result"]["objective"].get<double>());
  EXPECT_EQ(last["kappa"], report["result"]["kappa"]);

  std::ifstream rounds(prefix + ".rounds.jsonl");
  int prev = -1;
  while (std::getline(rounds, line)) {
    const json rec = json::parse(line);
    EXPECT_EQ(rec["option"], "II");
    EXPECT_GE(rec["kappa"].get<int>(), prev);
    prev = rec["kappa"].get<int>();
  }
  EXPECT_GE(prev, 0);
  EXPECT_TRUE(fs::exists(prefix + ".report.json"));
}

TEST(Cli, PartitionReportsKkt) {
  const Invocation r = invoke(sliding({"solve", "--solver", "pd", "--tol", "1e-10", "--max-iters", "200000"}, "0"));
  ASSERT_EQ(r.code, kConverged) << r.err;
  const json report = json::parse(r.out);
  EXPECT_LE(report["result"]["kkt"].get<double>(), 1e-7);
}

TEST(Cli, StepsizeGuardIsUsageError) {
  const Invocation r = invoke(sliding({"solve", "--solver", "pd", "--sigma", "1", "--tau", "1"}));
  EXPECT_EQ(r.code, kUsage);
  EXPECT_NE(r.err.find("ogl:"), std::string::npos);
}

TEST(Cli, BadFlagsAreUsageErrors) {
  EXPECT_EQ(invoke({"solve", "--solver", "lbfgs", "--gen", "sliding"}).code, kUsage);
  EXPECT_EQ(invoke({"frobnicate"}).code, kUsage);
  EXPECT_EQ(invoke({}).code, kUsage);
  EXPECT_EQ(invoke({"solve", "--data", "x.libsvm"}).code, kUsage);
}

TEST(Cli, IterationLimitIsFailure) {
  const Invocation r = invoke(sliding({"solve", "--solver", "admm", "--max-iters", "2", "--tol", "1e-14"}));
  EXPECT_EQ(r.code, kFailure);
  EXPECT_FALSE(json::parse(r.out)["result"]["converged"].get<bool>());
}

TEST(Cli, MissingFileIsFailure) {
  const Invocation r = invoke({"solve", "--data", "/nonexistent.libsvm", "--groups", "/nonexistent.grp"});
  EXPECT_EQ(r.code, kFailure);
}

TEST(Cli, CertifyPartitionCountsCoincide) {
  const Invocation r = invoke(sliding({"certify", "--solver", "admm", "--tol", "1e-10", "--max-iters", "200000",
                                "--lambda-ratio", "3"}, "0"));
  ASSERT_EQ(r.code, kConverged) << r.err;
  const CsvSummary s = read_csv(r.out);
  EXPECT_EQ(s.rows, 12);
  EXPECT_EQ(s.lasso, s.ogn);
  EXPECT_LE(s.ogn, s.true_zero);
}

TEST(Cli, CertifyAboveLambdaMaxDetectsAll) {
  const Invocation r = invoke(sliding({"certify", "--solver", "admm", "--lambda-ratio", "0.5"}));
  ASSERT_EQ(r.code, kConverged) << r.err;
  const CsvSummary s = read_csv(r.out);
  EXPECT_EQ(s.true_zero, 12);
  EXPECT_EQ(s.lasso, 12);
  EXPECT_EQ(s.ogn, 12);
}

TEST(Cli, CertifyOverlapOgnDominates) {
  const Invocation r = invoke(sliding({"certify", "--solver", "admm", "--tol", "1e-10", "--max-iters", "200000",
                                "--lambda-ratio", "2"}, "3"));
  ASSERT_EQ(r.code, kConverged) << r.err;
  const CsvSummary s = read_csv(r.out);
  EXPECT_GE(s.ogn, s.lasso);
  EXPECT_LE(s.ogn, s.true_zero);
}

TEST(Cli, GenThenSolveFromFiles) {
  TempDir dir;
  const std::string prefix = dir / "inst";
  const Invocation g = invoke({"gen", "--gen", "sliding", "--N", "12", "--gs", "5", "--os", "2", "--seed", "4",
                               "--out", prefix});
  ASSERT_EQ(g.code, kConverged) << g.err;
  const json meta = json::parse(g.out);
  EXPECT_EQ(meta["n"], 38);
  EXPECT_EQ(meta["groups"], 12);

  const Invocation from_gen = invoke(sliding({"solve", "--solver", "varpro", "--tol", "1e-10"}));
  const Invocation from_files = invoke({"solve", "--data", prefix + ".libsvm", "--groups", prefix + ".grp",
                                 "--solver", "varpro", "--tol", "1e-10"});
  ASSERT_EQ(from_files.code, kConverged) << from_files.err;
  const double a = json::parse(from_gen.out)["result"]["objective"].get<double>();
  const double b = json::parse(from_files.out)["result"]["objective"].get<double>();
  EXPECT_NEAR(a, b, 1e-8 * (1.0 + std::abs(a)));
}

TEST(Cli, TreeAndMultitaskGenerators) {
  const Invocation tree = invoke({"solve", "--gen", "tree", "--depth", "4", "--fanout", "2", "--solver", "admm"});
  ASSERT_EQ(tree.code, kConverged) << tree.err;
  EXPECT_EQ(json::parse(tree.out)["problem"]["n"], 15);

  const Invocation mt = invoke({"solve", "--gen", "multitask", "--features", "6", "--tasks", "3", "--solver", "pd"});
  ASSERT_EQ(mt.code, kConverged) << mt.err;
  const json report = json::parse(mt.out);
  EXPECT_EQ(report["problem"]["n"], 18);
  EXPECT_FALSE(report["problem"]["overlapping"].get<bool>());
}

TEST(Cli, Help) {
  const Invocation r = invoke({"--help"});
  EXPECT_EQ(r.code, kConverged);
  EXPECT_NE(r.out.find("certify"), std::string::npos);
}

}  // namespace
}  // namespace ogl::cli
