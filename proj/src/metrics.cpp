#include "cred/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>

#include "cred/error.hpp"
#include "cred/random.hpp"

namespace cred {

double percent_difference(double r_est, double r_gt) {
  if (std::abs(r_gt) < 1e-9)
    throw UndefinedBaselineError("ground-truth return is zero; reward difference is undefined");
  return (r_est - r_gt) / std::abs(r_gt) * 100.0;
}

double jaccard_index(const std::vector<int>& a, const std::vector<int>& b) {
  const std::set<int> sa(a.begin(), a.end());
  const std::set<int> sb(b.begin(), b.end());
  if (sa.empty() && sb.empty()) return 1.0;
  std::vector<int> inter;
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(inter));
  const std::size_t uni = sa.size() + sb.size() - inter.size();
  return static_cast<double>(inter.size()) / static_cast<double>(uni);
}

double action_agreement(const Environment& env, const Policy& estimate, const Policy& truth) {
  int counted = 0, matched = 0;
  for (int s = 0; s < env.num_states(); ++s) {
    if (s == env.goal_state() || !env.goal_reachable_from(s)) continue;
    ++counted;
    if (estimate.greedy[s] == truth.greedy[s]) ++matched;
  }
  return counted == 0 ? 1.0 : static_cast<double>(matched) / counted;
}

std::vector<int> evaluation_samples(const BeliefEnsemble& ensemble, int n_eval, std::uint64_t seed) {
  if (ensemble.size() == 0) throw ShapeError("metrics need a non-empty belief");
  Rng rng(derive_seed(seed, {0x6576616cULL}));
  std::uniform_int_distribution<int> pick(0, ensemble.size() - 1);
  std::vector<int> idx(static_cast<std::size_t>(std::max(n_eval, 1)));
  for (int& i : idx) i = pick(rng);
  return idx;
}

PolicyMetrics evaluate_policies(const BeliefEnsemble& ensemble, const WeightVector& w_true,
                                const Environment& env, const MetricOptions& opts,
                                PolicySolver& solver, std::uint64_t seed) {
  const auto truth = solver.solve(env, w_true);
  const double r_gt = policy_return(env, *truth, w_true, solver.options());
  const std::vector<int> truth_states = greedy_rollout(env, *truth).states();

  PolicyMetrics m;
  const std::vector<int> picks = evaluation_samples(ensemble, opts.n_eval, seed);
  for (int idx : picks) {
    const auto est = solver.solve(env, ensemble.sample(idx));
    const double r_est = policy_return(env, *est, w_true, solver.options());
    m.reward_diff += percent_difference(r_est, r_gt);
    m.policy_acc += action_agreement(env, *est, *truth);
    m.jaccard += jaccard_index(greedy_rollout(env, *est).states(), truth_states);
  }
  const double n = static_cast<double>(picks.size());
  m.reward_diff /= n;
  m.policy_acc /= n;
  m.jaccard /= n;
  return m;
}

double reward_difference(const BeliefEnsemble& ensemble, const WeightVector& w_true,
                         const Environment& env, int n_eval, PolicySolver& solver,
                         std::uint64_t seed) {
  return evaluate_policies(ensemble, w_true, env, {n_eval, 0}, solver, seed).reward_diff;
}

double policy_accuracy(const BeliefEnsemble& ensemble, const WeightVector& w_true,
                       const Environment& env, int n_eval, PolicySolver& solver,
                       std::uint64_t seed) {
  return evaluate_policies(ensemble, w_true, env, {n_eval, 0}, solver, seed).policy_acc;
}

double jaccard_similarity(const BeliefEnsemble& ensemble, const WeightVector& w_true,
                          const Environment& env, int n_eval, PolicySolver& solver,
                          std::uint64_t seed) {
  return evaluate_policies(ensemble, w_true, env, {n_eval, 0}, solver, seed).jaccard;
}

int entropy_grid_for(int dim) {
  switch (dim) {
    case 1: return 400;
    case 2: return 100;
    case 3: return 32;
    case 4: return 16;
    default: return 8;
  }
}

double entropy(const BeliefEnsemble& ensemble, int grid_points_per_dim) {
  const int g = grid_points_per_dim > 0 ? grid_points_per_dim : entropy_grid_for(ensemble.dim());
  return belief_entropy_kde(ensemble, g);
}

}  // namespace cred
