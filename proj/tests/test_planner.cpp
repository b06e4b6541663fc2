#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cred/error.hpp"
#include "cred/planner.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace cred;
using cred::testing::grid_from_rows;
using cred::testing::vec;

namespace {

constexpr int kRight = static_cast<int>(Move::kRight);
constexpr int kDown = static_cast<int>(Move::kDown);

WeightVector random_ball(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  WeightVector w(d);
  for (int i = 0; i < d; ++i) w[i] = n(rng);
  return w.normalized() * std::pow(u(rng), 1.0 / d);
}

}  // namespace

TEST(ValueIteration, ZeroWeightsFollowShortestPathsWithLowestActions) {
  auto env = Environment::from_grid(uniform_grid(4));
  auto pi = value_iteration(env, WeightVector::Zero(4));
  const auto& g = env.grid();
  for (int s = 0; s < env.num_states(); ++s) {
    if (s == env.goal_state()) continue;
    const GridCell c = g.cell_at(s);
    const int dist = (3 - c.row) + (3 - c.col);
    EXPECT_NEAR(pi.values[s], 10.0 * std::pow(env.gamma(), dist - 1), 1e-6);
    // Right and down both shorten the path whenever available; right wins.
    EXPECT_EQ(pi.action(s), c.col < 3 ? kRight : kDown) << s;
  }
}

TEST(ValueIteration, PrefersTheCheaperTwoStepPath) {
  // Right enters grass then brick goal; down enters sand then brick goal.
  auto env = Environment::from_grid(grid_from_rows({"03", "20"}));
  auto pi = value_iteration(env, vec({0.0, 0.0, -0.8, 0.3}));
  EXPECT_EQ(pi.action(0), kRight);
  auto pi2 = value_iteration(env, vec({0.0, 0.0, 0.3, -0.8}));
  EXPECT_EQ(pi2.action(0), kDown);
}

TEST(ValueIteration, MatchesExhaustivePathOracleOnSmallGrids) {
  std::mt19937_64 rng(11);
  for (auto rows : {grid_from_rows({"012", "301", "230"}), grid_from_rows({"0123", "1230", "2301", "3012"}),
                    grid_from_rows({"0000", "3333", "0000", "1111"})}) {
    auto env = Environment::from_grid(rows);
    for (int k = 0; k < 10; ++k) {
      WeightVector w = random_ball(4, rng);
      auto pi = value_iteration(env, w);
      EXPECT_NEAR(pi.values[env.start_state()], oracle::best_path_return(env, w, 10.0), 1e-6);
      EXPECT_NEAR(policy_return(env, pi, w), oracle::best_path_return(env, w, 10.0), 1e-6);
    }
  }
}

TEST(ValueIteration, MatchesExhaustivePathOracleOnSmallGraphs) {
  std::mt19937_64 rng(12);
  StreetGraph g;
  g.nodes = {0, 1, 2, 3, 4, 5};
  g.edges = {{0, 1, 1, 2, 0.5}, {1, 2, 2, 1, -0.3}, {0, 3, 3, 1, 0.2},
             {3, 4, 1, 3, -0.9}, {4, 5, 2, 2, 0.1}, {2, 5, 1, 4, 0.4}, {1, 4, 2, 2, 0.0}};
  g.start = 0;
  g.goal = 5;
  for (bool directed : {false, true}) {
    g.directed = directed;
    auto env = Environment::from_graph(g);
    for (int k = 0; k < 10; ++k) {
      WeightVector w = random_ball(3, rng);
      auto pi = value_iteration(env, w);
      EXPECT_NEAR(policy_return(env, pi, w), oracle::best_path_return(env, w, 10.0), 1e-6);
    }
  }
}

TEST(ValueIteration, JointScalingOfRewardLeavesPolicyUnchanged) {
  auto env = Environment::from_grid(grid_from_rows({"0123", "1230", "2301", "3012"}));
  std::mt19937_64 rng(3);
  for (int k = 0; k < 10; ++k) {
    WeightVector w = random_ball(4, rng);
    auto a = value_iteration(env, w, {1e-9, 10.0});
    auto b = value_iteration(env, 2.5 * w, {1e-9, 25.0});
    EXPECT_EQ(a.greedy, b.greedy);
  }
}

TEST(ValueIteration, DimensionMismatchThrows) {
  auto env = Environment::from_grid(uniform_grid(3));
  EXPECT_THROW(value_iteration(env, WeightVector::Zero(3)), ShapeError);
}

TEST(Rollout, GreedyIsDeterministic) {
  auto env = Environment::from_grid(grid_from_rows({"0123", "1230", "2301", "3012"}));
  auto pi = value_iteration(env, vec({-0.2, -0.5, -0.1, -0.7}));
  auto a = rollout(env, pi, 0.0, env.horizon(), 1);
  auto b = rollout(env, pi, 0.0, env.horizon(), 2);
  EXPECT_EQ(a.steps, b.steps);
  EXPECT_EQ(a.final_state, env.goal_state());
  for (const Step& s : a.steps) EXPECT_EQ(s.action, pi.action(s.state));
}

TEST(Rollout, EpsilonOneIsAUniformWalk) {
  auto env = Environment::from_grid(uniform_grid(5));
  auto pi = value_iteration(env, WeightVector::Zero(4));
  // From the start only right and down exist; a uniform walk splits evenly.
  int right = 0;
  const int n = 4000;
  for (int i = 0; i < n; ++i) right += rollout(env, pi, 1.0, 1, static_cast<std::uint64_t>(i)).steps[0].action == kRight;
  EXPECT_NEAR(right / static_cast<double>(n), 0.5, 0.03);
}

TEST(Rollout, SeededEpsilonRolloutsRepeat) {
  auto env = Environment::from_grid(uniform_grid(6));
  auto pi = value_iteration(env, vec({-0.1, 0.2, -0.3, 0.1}));
  auto a = rollout(env, pi, 0.25, env.horizon(), 99);
  auto b = rollout(env, pi, 0.25, env.horizon(), 99);
  EXPECT_EQ(a.steps, b.steps);
  EXPECT_LE(static_cast<int>(a.steps.size()), env.horizon());
}

TEST(Returns, LinearProjection) {
  EXPECT_DOUBLE_EQ(trajectory_return(vec({1, 0}), vec({3, 7})), 3.0);
  EXPECT_DOUBLE_EQ(trajectory_return(vec({0, 0}), vec({3, 7})), 0.0);
  EXPECT_NEAR(trajectory_return(vec({0.6, -0.8}), vec({2, 1})), 0.4, 1e-15);
  EXPECT_THROW(trajectory_return(vec({1, 0}), vec({1, 2, 3})), ShapeError);
}

TEST(Returns, PolicyReturnMatchesDiscountedRolloutWhenGoalIsReached) {
  auto env = Environment::from_grid(grid_from_rows({"0123", "1230", "2301", "3012"}));
  WeightVector w = vec({-0.3, -0.6, -0.2, -0.5});
  auto pi = value_iteration(env, w);
  auto t = greedy_rollout(env, pi);
  ASSERT_EQ(t.final_state, env.goal_state());
  EXPECT_NEAR(policy_return(env, pi, w), discounted_return(env, t, w), 1e-12);
}

TEST(Solver, CachesByEnvironmentAndWeight) {
  auto env = Environment::from_grid(uniform_grid(4));
  PolicySolver solver;
  auto a = solver.solve(env, vec({0.1, 0.2, 0.3, 0.4}));
  auto b = solver.solve(env, vec({0.1, 0.2, 0.3, 0.4}));
  EXPECT_EQ(a.get(), b.get());
  EXPECT_EQ(solver.hits(), 1u);
  auto other = Environment::from_grid(uniform_grid(4, Terrain::kSand));
  EXPECT_NE(solver.solve(other, vec({0.1, 0.2, 0.3, 0.4})).get(), a.get());
}
