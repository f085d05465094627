#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "ogl/adadrops.hpp"
#include "ogl/errors.hpp"
#include "oracles.hpp"

namespace ogl {

inline void PrintTo(SolverKind k, std::ostream* os) { *os << to_string(k); }
inline void PrintTo(UpdateOption o, std::ostream* os) { *os << to_string(o); }

namespace {

using testing::gaussian_mat;
using testing::gaussian_vec;
using testing::Rng;

IndexList to_list(const Mask& m) {
  IndexList out;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i]) out.push_back(static_cast<Index>(i));
  }
  return out;
}

bool contains(const IndexList& s, Index t) { return std::binary_search(s.begin(), s.end(), t); }

double rel_gap(double a, double b) { return std::abs(a - b) / (1.0 + std::abs(b)); }

SolverConfig tight() {
  SolverConfig c;
  c.stop_tol = 1e-10;
  c.max_iters = 200000;
  return c;
}

double lambda_max_of(const Mat& A, const Vec& y, const LiftingOperator& L) {
  return lasso_margins(L, A.transpose() * y).maxCoeff();
}

struct Instance {
  GroupCovering cov;
  Mat A;
  ProblemData problem;
};

Instance sliding_instance(Rng& rng, Index N, Index gs, Index os, Index m, double ratio) {
  GroupCovering cov = testing::random_sliding(rng, N, gs, os);
  const LiftingOperator L(cov);
  const Mat A = gaussian_mat(rng, m, cov.dim());
  Vec x = Vec::Zero(cov.dim());
  for (Index t = 0; t < N; t += 5) {
    for (Index i : cov.group(t)) x[i] = gaussian_vec(rng, 1)[0];
  }
  const Vec y = A * x + 0.1 * gaussian_vec(rng, m);
  const double lambda = lambda_max_of(A, y, L) / ratio;
  return {cov, A, ProblemData(DesignMatrix(A), y, lambda)};
}

TEST(UpdateOption, Parse) {
  EXPECT_EQ(parse_update_option("lasso"), UpdateOption::Lasso);
  EXPECT_EQ(parse_update_option("I"), UpdateOption::Lasso);
  EXPECT_EQ(parse_update_option("ogn"), UpdateOption::Ogn);
  EXPECT_EQ(parse_update_option("II"), UpdateOption::Ogn);
  EXPECT_EQ(to_string(UpdateOption::Ogn), "II");
  EXPECT_THROW(parse_update_option("III"), ConfigError);
}

TEST(BuildRestricted, ChainExamples) {
  Rng rng(51);
  const LiftingOperator L(GroupCovering(4, {{0, 1}, {1, 2}, {2, 3}}, 1.0));
  const ProblemData p(DesignMatrix(gaussian_mat(rng, 6, 4)), gaussian_vec(rng, 6), 1.0);

  const RestrictedProblem two = build_restricted(p, L, IndexList{0, 1});
  EXPECT_EQ(two.columns, (IndexList{0, 1}));
  ASSERT_TRUE(two.problem.has_value());
  EXPECT_EQ(two.problem->A.cols(), 2);
  EXPECT_EQ(two.kappa(), 2);

  const RestrictedProblem none = build_restricted(p, L, IndexList{});
  EXPECT_TRUE(none.empty());
  EXPECT_FALSE(none.problem.has_value());

  const RestrictedProblem all = build_restricted(p, L, IndexList{0, 1, 2});
  EXPECT_EQ(all.kappa(), 4);
  EXPECT_EQ(all.lifting->lifted_dim(), L.lifted_dim());
  const Vec x = gaussian_vec(rng, 4);
  EXPECT_NEAR(objective(*all.problem, *all.lifting, all.gather(x)), objective(p, L, x), 1e-12);
}

TEST(BuildRestricted, ScatterGatherRoundTrip) {
  Rng rng(52);
  const GroupCovering cov = testing::random_covering(rng, 30, 10);
  const LiftingOperator L(cov);
  const ProblemData p(DesignMatrix(gaussian_mat(rng, 10, 30)), gaussian_vec(rng, 10), 1.0);
  const RestrictedProblem R = build_restricted(p, L, IndexList{1, 4, 7});
  const Vec xs = gaussian_vec(rng, R.kappa());
  const Vec x = R.scatter(xs, 30);
  EXPECT_EQ(R.gather(x), xs);
  EXPECT_EQ(mask_project(x, R.support.x_mask, true), Vec::Zero(30));
  EXPECT_NEAR(group_norm(*R.lifting, xs), group_norm(L, x), 1e-12);
}

TEST(BuildRestricted, SolveMatchesMaskedFullSolve) {
  Rng rng(53);
  for (int trial = 0; trial < 5; ++trial) {
    const GroupCovering cov = testing::random_covering(rng, 24, 8);
    const LiftingOperator L(cov);
    const Mat A = gaussian_mat(rng, 12, 24);
    const ProblemData p(DesignMatrix(A), gaussian_vec(rng, 12), 0.5);
    const IndexList I = to_list(testing::random_group_mask(rng, 8, 0.5));
    const RestrictedProblem R = build_restricted(p, L, I);
    if (R.empty()) continue;
    const Vec x_sub = R.scatter(admm_solve(*R.problem, *R.lifting, tight()).x, 24);

    Mat A_masked = A;
    for (Index i = 0; i < 24; ++i) {
      if (!R.support.x_mask[static_cast<std::size_t>(i)]) A_masked.col(i).setZero();
    }
    const ProblemData masked(DesignMatrix(A_masked), p.y, p.lambda);
    const Vec x_dense = admm_solve(masked, L, tight()).x;
    EXPECT_LE(rel_gap(objective(p, L, x_sub), objective(masked, L, x_dense)), 1e-7);
    EXPECT_LE((x_sub - x_dense).norm(), 1e-4 * (1.0 + x_dense.norm()));
  }
}

TEST(SupportUpdate, ZeroBetaAddsNothing) {
  const LiftingOperator L(GroupCovering(4, {{0, 1}, {1, 2}, {2, 3}}, 1.0));
  const ProblemData p(DesignMatrix(Mat::Identity(4, 4)), Vec::Zero(4), 1.0);
  const SupportState S = compute_supports(L, IndexList{});
  for (UpdateOption o : {UpdateOption::Lasso, UpdateOption::Ogn}) {
    const SupportUpdate u = support_update(p, L, S, Vec::Zero(4), o);
    EXPECT_TRUE(u.added.empty());
    EXPECT_TRUE(u.violating.empty());
  }
}

TEST(SupportUpdate, EmptyAtFullSolution) {
  Rng rng(54);
  const Instance inst = sliding_instance(rng, 12, 6, 2, 30, 3.0);
  const LiftingOperator L(inst.cov);
  const SolveResult r = admm_solve(inst.problem, L, tight());
  const SupportState S = compute_supports(L, reported_support(L, r));
  EXPECT_TRUE(support_update(inst.problem, L, S, r.x, UpdateOption::Ogn, 10, 1e-6).added.empty());

  const GroupCovering part = testing::random_partition(rng, 40, 10);
  const LiftingOperator P(part);
  const ProblemData p(DesignMatrix(gaussian_mat(rng, 30, 40)), gaussian_vec(rng, 30), 3.0);
  const SolveResult rp = admm_solve(p, P, tight());
  const SupportState SP = compute_supports(P, reported_support(P, rp));
  for (UpdateOption o : {UpdateOption::Lasso, UpdateOption::Ogn}) {
    EXPECT_TRUE(support_update(p, P, SP, rp.x, o, 10, 1e-6).added.empty());
  }
}

TEST(SupportUpdate, OptionsAgreeOnPartitions) {
  Rng rng(55);
  for (int trial = 0; trial < 20; ++trial) {
    const GroupCovering cov = testing::random_partition(rng, 30, 10);
    const LiftingOperator L(cov);
    const ProblemData p(DesignMatrix(gaussian_mat(rng, 20, 30)), gaussian_vec(rng, 20), 0.3);
    Mask active = testing::random_group_mask(rng, 10, 0.3);
    const Vec x = testing::random_support_vector(rng, cov, active);
    const SupportState S = compute_supports(L, to_list(active));
    const SupportUpdate a = support_update(p, L, S, x, UpdateOption::Lasso, 100);
    const SupportUpdate b = support_update(p, L, S, x, UpdateOption::Ogn, 100);
    EXPECT_EQ(a.violating, b.violating);
    EXPECT_EQ(a.added, b.added);
  }
}

TEST(SupportUpdate, OgnViolationsAreLassoViolations) {
  Rng rng(56);
  for (int trial = 0; trial < 20; ++trial) {
    const GroupCovering cov = testing::random_covering(rng, 40, 14);
    const LiftingOperator L(cov);
    const ProblemData p(DesignMatrix(gaussian_mat(rng, 20, 40)), gaussian_vec(rng, 20), 0.5);
    Mask active = testing::random_group_mask(rng, 14, 0.2);
    const Vec x = testing::random_support_vector(rng, cov, active);
    const SupportState S = compute_supports(L, to_list(active));
    const SupportUpdate lasso = support_update(p, L, S, x, UpdateOption::Lasso, 100);
    const SupportUpdate ogn = support_update(p, L, S, x, UpdateOption::Ogn, 100);
    for (Index t : ogn.violating) EXPECT_TRUE(contains(lasso.violating, t));
  }
}

TEST(SupportUpdate, GrowthCapKeepsLargestMargins) {
  Rng rng(57);
  const GroupCovering cov = testing::random_partition(rng, 40, 20);
  const LiftingOperator L(cov);
  const ProblemData p(DesignMatrix(gaussian_mat(rng, 30, 40)), gaussian_vec(rng, 30), 0.01);
  const SupportState S = compute_supports(L, IndexList{});
  const SupportUpdate u = support_update(p, L, S, Vec::Zero(40), UpdateOption::Lasso, 3);
  ASSERT_GT(u.violating.size(), 3u);
  ASSERT_EQ(u.added.size(), 3u);
  EXPECT_TRUE(std::is_sorted(u.added.begin(), u.added.end()));
  const double kept = std::min({u.margins[u.added[0]], u.margins[u.added[1]], u.margins[u.added[2]]});
  for (Index t : u.violating) {
    if (!contains(u.added, t)) EXPECT_LE(u.margins[t], kept);
  }
}

TEST(AdaDrops, HugeLambdaStopsAtInitialSupport) {
  Rng rng(58);
  const Instance inst = sliding_instance(rng, 10, 5, 1, 20, 0.5);
  const LiftingOperator L(inst.cov);
  AdaDropsConfig c;
  c.init_size = 2;
  c.inner = tight();
  const AdaDropsResult r = adadrops_run(inst.problem, L, SolverKind::Admm, c);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.x.norm(), 1e-8);
  EXPECT_EQ(r.active.size(), 2u);
  for (const auto& rec : r.rounds) EXPECT_TRUE(rec.added_groups.empty());
}

TEST(AdaDrops, SupersetStartNeedsOneRound) {
  Rng rng(59);
  const Instance inst = sliding_instance(rng, 12, 6, 2, 30, 3.0);
  const LiftingOperator L(inst.cov);
  const SolveResult full = admm_solve(inst.problem, L, tight());
  AdaDropsConfig c;
  c.initial_groups = reported_support(L, full);
  c.inner = tight();
  c.outer_tol = 1e-6;
  const AdaDropsResult r = adadrops_run(inst.problem, L, SolverKind::Admm, c);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.rounds.size(), 1u);
  EXPECT_LE(rel_gap(r.objective, full.objective), 1e-6);
}

class AdaDropsSolvers : public ::testing::TestWithParam<std::tuple<SolverKind, UpdateOption>> {};

TEST_P(AdaDropsSolvers, MatchesVanillaOnOverlappingInstance) {
  const auto [solver, option] = GetParam();
  Rng rng(60);
  const Instance inst = sliding_instance(rng, 28, 10, 3, 50, 4.0);
  ASSERT_EQ(inst.cov.dim(), 199);
  const LiftingOperator L(inst.cov);
  const double full = admm_solve(inst.problem, L, tight()).objective;

  AdaDropsConfig c;
  c.option = option;
  c.inner = tight();
  const AdaDropsResult r = adadrops_run(inst.problem, L, solver, c);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(rel_gap(r.objective, full), 1e-5);
  EXPECT_LT(r.rounds.back().kappa, inst.cov.dim());

  for (std::size_t k = 0; k + 1 < r.rounds.size(); ++k) {
    EXPECT_LE(r.rounds[k].kappa, r.rounds[k + 1].kappa);
    for (Index t : r.rounds[k + 1].added_groups) {
      for (std::size_t j = 0; j <= k; ++j) EXPECT_FALSE(contains(r.rounds[j].added_groups, t));
    }
  }
  const SupportState S = compute_supports(L, r.active);
  EXPECT_LE(max_inactive_ogn_margin(inst.problem, L, S, r.x), 1.0 + 1e-6);
}

INSTANTIATE_TEST_SUITE_P(
    Combos, AdaDropsSolvers,
    ::testing::Combine(::testing::Values(SolverKind::PrimalDual, SolverKind::Admm,
                                         SolverKind::VarPro),
                       ::testing::Values(UpdateOption::Lasso, UpdateOption::Ogn)),
    [](const auto& info) {
      return std::string(to_string(std::get<0>(info.param))) + "_" +
             std::string(to_string(std::get<1>(info.param)));
    });

TEST(AdaDrops, RoundsJsonLines) {
  std::vector<RoundRecord> rounds(2);
  rounds[0].round = 0;
  rounds[0].kappa = 7;
  rounds[1].round = 1;
  rounds[1].kappa = 12;
  rounds[1].added_groups = {0, 4};
  std::ostringstream os;
  write_rounds_jsonl(os, rounds);
  std::istringstream is(os.str());
  std::string line;
  std::vector<nlohmann::json> parsed;
  while (std::getline(is, line)) parsed.push_back(nlohmann::json::parse(line));
  ASSERT_EQ(parsed.size(), 2u);
  EXPECT_EQ(parsed[1]["round"], 1);
  EXPECT_EQ(parsed[1]["kappa"], 12);
  EXPECT_EQ(parsed[1]["added_groups"], nlohmann::json::array({1, 5}));
  EXPECT_EQ(parsed[1]["option"], "II");
}

TEST(AdaDrops, OuterRoundLimit) {
  Rng rng(61);
  const Instance inst = sliding_instance(rng, 20, 5, 1, 40, 20.0);
  const LiftingOperator L(inst.cov);
  AdaDropsConfig c;
  c.init_size = 1;
  c.growth_cap = 1;
  c.max_outer_rounds = 1;
  c.inner = tight();
  EXPECT_THROW(adadrops_run(inst.problem, L, SolverKind::Admm, c), ConvergenceError);
}

}  // namespace
}  // namespace ogl
