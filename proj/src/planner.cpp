#include "cred/planner.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cred/error.hpp"

namespace cred {

namespace {

Eigen::VectorXd arc_rewards(const Environment& env, const WeightVector& w, double goal_bonus) {
  if (w.size() != env.feature_dim())
    throw ShapeError("weight dimension " + std::to_string(w.size()) +
                     " does not match feature dimension " + std::to_string(env.feature_dim()));
  Eigen::VectorXd r = env.arc_features().transpose() * w;
  const int goal = env.goal_state();
  const auto offsets = env.arc_offset();
  for (int s = 0; s < env.num_states(); ++s) {
    const auto arcs = env.arcs(s);
    for (std::size_t k = 0; k < arcs.size(); ++k)
      if (arcs[k].next == goal) r[offsets[s] + static_cast<Eigen::Index>(k)] += goal_bonus;
  }
  return r;
}

bool ties(double a, double b) {
  return std::abs(a - b) <= kTieTolerance * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

}  // namespace

Policy value_iteration(const Environment& env, const WeightVector& w, const PlannerOptions& opts) {
  const Eigen::VectorXd reward = arc_rewards(env, w, opts.goal_bonus);
  const double gamma = env.gamma();
  const int n = env.num_states();
  const auto offsets = env.arc_offset();

  Policy pi;
  pi.weights = w;
  pi.values.assign(n, 0.0);
  pi.q.assign(static_cast<std::size_t>(reward.size()), 0.0);
  std::vector<double> next(n, 0.0);

  // ||V_{k+1} - V_k|| < tol (1 - gamma) / gamma bounds ||V_{k+1} - V*|| by tol.
  const double threshold = gamma > 0.0 ? opts.tol * (1.0 - gamma) / gamma
                                        : std::numeric_limits<double>::infinity();
  const int max_sweeps = 100000;
  for (pi.sweeps = 1; pi.sweeps <= max_sweeps; ++pi.sweeps) {
    double delta = 0.0;
    for (int s = 0; s < n; ++s) {
      const auto arcs = env.arcs(s);
      if (arcs.empty()) {
        next[s] = 0.0;
        continue;
      }
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < arcs.size(); ++k) {
        const auto idx = static_cast<std::size_t>(offsets[s]) + k;
        const double q = reward[static_cast<Eigen::Index>(idx)] + gamma * pi.values[arcs[k].next];
        pi.q[idx] = q;
        best = std::max(best, q);
      }
      next[s] = best;
      delta = std::max(delta, std::abs(best - pi.values[s]));
    }
    pi.values.swap(next);
    if (delta < threshold) break;
  }

  // Final Q from the converged V, then the greedy action with lowest-index ties.
  pi.greedy.assign(n, -1);
  for (int s = 0; s < n; ++s) {
    const auto arcs = env.arcs(s);
    if (arcs.empty()) continue;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < arcs.size(); ++k) {
      const auto idx = static_cast<std::size_t>(offsets[s]) + k;
      pi.q[idx] = reward[static_cast<Eigen::Index>(idx)] + gamma * pi.values[arcs[k].next];
      best = std::max(best, pi.q[idx]);
    }
    for (std::size_t k = 0; k < arcs.size(); ++k) {
      const auto idx = static_cast<std::size_t>(offsets[s]) + k;
      if (ties(pi.q[idx], best) && (pi.greedy[s] < 0 || arcs[k].action < pi.greedy[s]))
        pi.greedy[s] = arcs[k].action;
    }
  }
  return pi;
}

Trajectory rollout(const Environment& env, const Policy& policy, double epsilon, int horizon,
                   Rng& rng) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<Step> steps;
  steps.reserve(static_cast<std::size_t>(std::max(horizon, 0)));
  int state = env.start_state();
  for (int t = 0; t < horizon && state != env.goal_state(); ++t) {
    const auto arcs = env.arcs(state);
    if (arcs.empty()) break;
    int action = policy.greedy.empty() ? -1 : policy.greedy[state];
    // The coin is always drawn so the random stream does not depend on epsilon.
    const double u = coin(rng);
    if (u < epsilon || action < 0) {
      std::uniform_int_distribution<std::size_t> pick(0, arcs.size() - 1);
      action = arcs[pick(rng)].action;
    }
    steps.push_back(Step{state, action});
    state = env.next_state(state, action);
  }
  return make_trajectory(env, std::move(steps));
}

Trajectory rollout(const Environment& env, const Policy& policy, double epsilon, int horizon,
                   std::uint64_t seed) {
  Rng rng(seed);
  return rollout(env, policy, epsilon, horizon, rng);
}

Trajectory random_walk(const Environment& env, int horizon, Rng& rng) {
  return rollout(env, Policy{}, 1.0, horizon, rng);
}

Trajectory greedy_rollout(const Environment& env, const Policy& policy) {
  Rng unused(0);
  return rollout(env, policy, 0.0, env.horizon(), unused);
}

double trajectory_return(const WeightVector& w, const FeatureVector& phi) {
  if (w.size() != phi.size())
    throw ShapeError("weight and feature dimensions differ: " + std::to_string(w.size()) + " vs " +
                     std::to_string(phi.size()));
  return w.dot(phi);
}

double discounted_return(const Environment& env, const Trajectory& traj, const WeightVector& w,
                         const PlannerOptions& opts) {
  double total = 0.0;
  double discount = 1.0;
  for (const Step& step : traj.steps) {
    double r = trajectory_return(w, env.step_features(step.state, step.action));
    if (env.next_state(step.state, step.action) == env.goal_state()) r += opts.goal_bonus;
    total += discount * r;
    discount *= env.gamma();
  }
  return total;
}

double policy_return(const Environment& env, const Policy& policy, const WeightVector& w_eval,
                     const PlannerOptions& opts) {
  const double gamma = env.gamma();
  std::vector<int> first_visit(env.num_states(), -1);
  std::vector<double> prefix;  // prefix[t] = discounted reward collected before step t
  prefix.push_back(0.0);
  double discount = 1.0;
  int state = env.start_state();
  for (int t = 0;; ++t) {
    if (state == env.goal_state()) return prefix.back();
    const int action = policy.greedy[state];
    if (action < 0) return prefix.back();
    if (first_visit[state] >= 0) {
      const int t0 = first_visit[state];
      const double cycle = prefix.back() - prefix[t0];
      const double loop_discount = std::pow(gamma, t - t0);
      return prefix[t0] + cycle / (1.0 - loop_discount);
    }
    first_visit[state] = t;
    double r = trajectory_return(w_eval, env.step_features(state, action));
    const int next = env.next_state(state, action);
    if (next == env.goal_state()) r += opts.goal_bonus;
    prefix.push_back(prefix.back() + discount * r);
    discount *= gamma;
    state = next;
  }
}

std::shared_ptr<const Policy> PolicySolver::solve(const Environment& env, const WeightVector& w) {
  std::ostringstream key;
  key << env.id();
  for (Eigen::Index i = 0; i < w.size(); ++i) key << ':' << std::llround(w[i] * 1e9);
  const std::string k = key.str();
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(k); it != cache_.end()) {
      ++hits_;
      return it->second;
    }
  }
  auto policy = std::make_shared<const Policy>(value_iteration(env, w, opts_));
  std::lock_guard lock(mutex_);
  ++misses_;
  if (cache_.size() >= capacity_) cache_.clear();
  cache_.emplace(k, policy);
  return policy;
}

}  // namespace cred
