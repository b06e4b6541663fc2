#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "cred/error.hpp"
#include "cred/metrics.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace cred;
using cred::testing::grid_from_rows;
using cred::testing::vec;

namespace {

BeliefEnsemble point_mass(const WeightVector& w, int n = 5) {
  BeliefEnsemble e;
  e.samples = w.replicate(1, n);
  return e;
}

BeliefEnsemble random_ball(int d, int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u;
  BeliefEnsemble e;
  e.samples.resize(d, n);
  for (int i = 0; i < n; ++i) {
    WeightVector w(d);
    for (int j = 0; j < d; ++j) w[j] = g(rng);
    e.samples.col(i) = w.normalized() * std::pow(u(rng), 1.0 / d);
  }
  return e;
}

Environment fixture_grid() {
  return Environment::from_grid(grid_from_rows({"01230", "11220", "33010", "20031", "01120"}));
}

}  // namespace

TEST(PercentDifference, HandExamples) {
  EXPECT_DOUBLE_EQ(percent_difference(3.0, 4.0), -25.0);
  EXPECT_DOUBLE_EQ(percent_difference(-6.0, -4.0), -50.0);
  EXPECT_DOUBLE_EQ(percent_difference(4.0, 4.0), 0.0);
}

TEST(PercentDifference, ZeroBaselineIsUndefined) {
  EXPECT_THROW(percent_difference(1.0, 0.0), UndefinedBaselineError);
  EXPECT_THROW(percent_difference(1.0, 5e-10), UndefinedBaselineError);
}

TEST(Jaccard, SetArithmetic) {
  // Seven distinct states, three shared.
  EXPECT_DOUBLE_EQ(jaccard_index({0, 1, 2, 3, 4}, {2, 3, 4, 5, 6}), 3.0 / 7.0);
  EXPECT_DOUBLE_EQ(jaccard_index({0, 1, 2}, {0, 1, 2}), 1.0);
  EXPECT_DOUBLE_EQ(jaccard_index({0, 1}, {2, 3}), 0.0);
  EXPECT_DOUBLE_EQ(jaccard_index({}, {}), 1.0);
  // Revisits do not count twice.
  EXPECT_DOUBLE_EQ(jaccard_index({0, 1, 0, 1}, {1, 2}), 1.0 / 3.0);
}

TEST(ActionAgreement, TwoOfEightDisagreeingStatesGiveThreeQuarters) {
  const auto env = Environment::from_grid(grid_from_rows({"000", "000", "000"}));
  Policy truth, est;
  truth.greedy = {0, 0, 1, 1, 0, 1, 0, 0, -1};
  est = truth;
  est.greedy[0] = 1;
  est.greedy[4] = 1;
  EXPECT_DOUBLE_EQ(action_agreement(env, est, truth), 0.75);
}

TEST(PolicyMetrics, PointMassAtTheTruthIsIdeal) {
  const auto env = fixture_grid();
  PolicySolver solver;
  std::mt19937_64 rng(3);
  for (int k = 0; k < 5; ++k) {
    const auto w = random_ball(4, 1, rng).samples.col(0).eval();
    const auto m = evaluate_policies(point_mass(w), w, env, {10, 0}, solver, k);
    EXPECT_NEAR(m.reward_diff, 0.0, 1e-12);
    EXPECT_DOUBLE_EQ(m.policy_acc, 1.0);
    EXPECT_DOUBLE_EQ(m.jaccard, 1.0);
  }
}

TEST(PolicyMetrics, RewardDifferenceIsNeverPositive) {
  const auto env = fixture_grid();
  PolicySolver solver;
  std::mt19937_64 rng(4);
  for (int k = 0; k < 20; ++k) {
    const WeightVector w_true = random_ball(4, 1, rng).samples.col(0);
    const auto e = random_ball(4, 30, rng);
    const auto m = evaluate_policies(e, w_true, env, {20, 0}, solver, k);
    EXPECT_LE(m.reward_diff, 1e-4);
    EXPECT_GE(m.policy_acc, 0.0);
    EXPECT_LE(m.policy_acc, 1.0);
    EXPECT_GE(m.jaccard, 0.0);
    EXPECT_LE(m.jaccard, 1.0);
  }
}

TEST(PolicyMetrics, GroundTruthReturnMatchesTheExhaustiveOracle) {
  // With a point mass at another weight, the reward difference is the
  // relative gap between that weight's greedy path and the enumerated optimum.
  const auto env = Environment::from_grid(grid_from_rows({"012", "320", "101"}));
  PolicySolver solver;
  const WeightVector w_true = vec({-0.2, -0.9, -0.1, -0.3});
  const WeightVector w_est = vec({-0.9, -0.1, -0.5, -0.2});
  const double r_gt = oracle::best_path_return(env, w_true, solver.options().goal_bonus);
  const auto est = solver.solve(env, w_est);
  const double r_est = policy_return(env, *est, w_true, solver.options());
  const double diff = reward_difference(point_mass(w_est), w_true, env, 4, solver, 1);
  EXPECT_NEAR(diff, (r_est - r_gt) / std::abs(r_gt) * 100.0, 1e-6);
}

TEST(PolicyMetrics, PureGivenTheSeed) {
  const auto env = fixture_grid();
  PolicySolver a, b;
  std::mt19937_64 rng(5);
  const auto e = random_ball(4, 40, rng);
  const WeightVector w = vec({-0.5, 0.1, -0.3, 0.2});
  const auto x = evaluate_policies(e, w, env, {20, 0}, a, 77);
  const auto y = evaluate_policies(e, w, env, {20, 0}, b, 77);
  EXPECT_EQ(x.reward_diff, y.reward_diff);
  EXPECT_EQ(x.policy_acc, y.policy_acc);
  EXPECT_EQ(x.jaccard, y.jaccard);
}

TEST(PolicyMetrics, EmptyBeliefIsRejected) {
  const auto env = fixture_grid();
  PolicySolver solver;
  BeliefEnsemble empty;
  empty.samples.resize(4, 0);
  EXPECT_THROW(evaluate_policies(empty, vec({0, 0, 0, -1}), env, {}, solver, 0), ShapeError);
}
