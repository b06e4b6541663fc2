#pragma once

#include <cstdint>
#include <set>
#include <vector>

#include "cred/belief.hpp"
#include "cred/env.hpp"
#include "cred/planner.hpp"

namespace cred {

struct MetricOptions {
  int n_eval = 20;               // weights drawn from the belief per evaluation
  int entropy_grid_points = 0;   // 0: choose by dimension (see entropy_grid_for)
};

/// (R_est - R_gt) / |R_gt| * 100. Throws UndefinedBaselineError when
/// |R_gt| < 1e-9.
double percent_difference(double r_est, double r_gt);

/// |A n B| / |A u B| over visited states; 1 when both are empty.
double jaccard_index(const std::vector<int>& a, const std::vector<int>& b);

/// Fraction of non-goal states that can reach the goal where both policies
/// pick the same action.
double action_agreement(const Environment& env, const Policy& estimate, const Policy& truth);

/// Policy-level metrics of one environment, averaged over belief samples.
struct PolicyMetrics {
  double reward_diff = 0.0;   // percent
  double policy_acc = 0.0;    // fraction
  double jaccard = 0.0;       // fraction
};

/// Indices of the belief samples used for evaluation (bootstrap per seed).
std::vector<int> evaluation_samples(const BeliefEnsemble& ensemble, int n_eval, std::uint64_t seed);

PolicyMetrics evaluate_policies(const BeliefEnsemble& ensemble, const WeightVector& w_true,
                                const Environment& env, const MetricOptions& opts,
                                PolicySolver& solver, std::uint64_t seed);

double reward_difference(const BeliefEnsemble& ensemble, const WeightVector& w_true,
                         const Environment& env, int n_eval, PolicySolver& solver,
                         std::uint64_t seed);
double policy_accuracy(const BeliefEnsemble& ensemble, const WeightVector& w_true,
                       const Environment& env, int n_eval, PolicySolver& solver,
                       std::uint64_t seed);
double jaccard_similarity(const BeliefEnsemble& ensemble, const WeightVector& w_true,
                          const Environment& env, int n_eval, PolicySolver& solver,
                          std::uint64_t seed);

/// Grid resolution used for KDE entropy when none is configured.
int entropy_grid_for(int dim);

/// Belief entropy in nats.
double entropy(const BeliefEnsemble& ensemble, int grid_points_per_dim = 0);

}  // namespace cred
