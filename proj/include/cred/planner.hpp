#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "cred/env.hpp"
#include "cred/random.hpp"

namespace cred {

struct PlannerOptions {
  double tol = 1e-6;
  /// Added to the reward of the transition that enters the goal. Not part
  /// of the learned weights.
  double goal_bonus = 10.0;
};

/// Optimal tabular policy for one weight vector.
struct Policy {
  WeightVector weights;
  std::vector<double> values;   // V(s); 0 at the goal
  std::vector<double> q;        // aligned with Environment::arc_offset()
  std::vector<int> greedy;      // action per state, -1 where no action exists
  int sweeps = 0;

  int action(int state) const { return greedy[state]; }
};

/// Relative tolerance under which two Q values count as tied.
inline constexpr double kTieTolerance = 1e-10;

/// Value iteration until the sup-norm error of V is below `opts.tol`.
/// Per-transition reward is w . step_features (+ goal bonus on arrival).
Policy value_iteration(const Environment& env, const WeightVector& w,
                       const PlannerOptions& opts = {});

/// Rolls out `policy`, taking a uniformly random legal action with
/// probability `epsilon`. Stops at the goal, at a dead end, or after
/// `horizon` steps.
Trajectory rollout(const Environment& env, const Policy& policy, double epsilon, int horizon,
                   Rng& rng);
Trajectory rollout(const Environment& env, const Policy& policy, double epsilon, int horizon,
                   std::uint64_t seed);

/// Uniform random walk (epsilon = 1).
Trajectory random_walk(const Environment& env, int horizon, Rng& rng);

/// Deterministic greedy rollout over the environment's horizon.
Trajectory greedy_rollout(const Environment& env, const Policy& policy);

/// w . Phi. Throws ShapeError on a dimension mismatch.
double trajectory_return(const WeightVector& w, const FeatureVector& phi);

/// Discounted return of the transitions in `traj` under `w`, goal bonus
/// included when the goal is entered.
double discounted_return(const Environment& env, const Trajectory& traj, const WeightVector& w,
                         const PlannerOptions& opts = {});

/// Infinite-horizon discounted return of following `policy` greedily from
/// the start state, scored under `w_eval`. Cycles are closed analytically,
/// so this equals the policy's value under `w_eval` exactly.
double policy_return(const Environment& env, const Policy& policy, const WeightVector& w_eval,
                     const PlannerOptions& opts = {});

/// Memoizes policies by (environment id, weight quantized to 1e-9).
class PolicySolver {
 public:
  explicit PolicySolver(PlannerOptions opts = {}, std::size_t capacity = 4096)
      : opts_(opts), capacity_(capacity) {}

  std::shared_ptr<const Policy> solve(const Environment& env, const WeightVector& w);
  const PlannerOptions& options() const { return opts_; }
  std::size_t hits() const { return hits_; }
  std::size_t misses() const { return misses_; }

 private:
  PlannerOptions opts_;
  std::size_t capacity_;
  std::mutex mutex_;
  std::unordered_map<std::string, std::shared_ptr<const Policy>> cache_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

}  // namespace cred
