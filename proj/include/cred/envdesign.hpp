#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "cred/env.hpp"
#include "cred/gp.hpp"
#include "cred/querygen.hpp"
#include "cred/random.hpp"

namespace cred {

struct DesignOptions {
  int iterations = 15;         // T outer proposals per preference round
  int initial_random = 5;      // T0 uniform proposals that seed the GP
  double kappa = 2.0;          // UCB exploration weight
  int n_candidates = 2000;     // random candidates per acquisition step
  double jitter_fraction = 0.05;  // perturbation of the incumbent, per box width
  bool fit_hyperparams = true;
  double initial_length_fraction = 0.3;  // length scale before the first fit
};

/// UCB argmax over `n_candidates` uniform points plus the best observed
/// point perturbed by Gaussian jitter, clipped to the box.
Eigen::VectorXd propose_theta(const GpModel& model, const Box& bounds, double kappa,
                              int n_candidates, Rng& rng, double jitter_fraction = 0.05);

struct TraceEntry {
  Eigen::VectorXd theta;
  double value = 0.0;      // F(theta); 0 for failed evaluations
  bool valid = true;       // false when the inner evaluation was degenerate
  double wall_time_s = 0.0;
};

struct OptimizationResult {
  std::vector<TraceEntry> trace;
  int best = -1;  // index into trace of the best valid entry, -1 if none
};

/// Objective for the outer loop. std::nullopt marks a failed evaluation.
using DesignObjective = std::function<std::optional<double>(const Eigen::VectorXd&)>;

/// GP-UCB maximization of `objective` over `bounds`.
OptimizationResult bayes_optimize(const Box& bounds, const DesignObjective& objective,
                                  const DesignOptions& opts, std::uint64_t seed);

struct DesignResult {
  EnvParamVector best_theta;
  std::optional<PreferenceQuery> query;
  std::vector<TraceEntry> trace;
  bool fallback = false;  // every inner query was degenerate

  double best_value() const;
};

/// Inner query generator run in each decoded environment.
using InnerQuery =
    std::function<std::optional<PreferenceQuery>(std::shared_ptr<const Environment>)>;

/// Query used when every designed environment yields a degenerate query.
using FallbackQuery = std::function<PreferenceQuery(std::shared_ptr<const Environment>)>;

/// Outer loop of the bilevel problem: propose theta, decode it onto the
/// template, run the inner generator there, and score theta by the gain of
/// the returned query. If no proposal produced a query, `fallback` runs in
/// the template environment and the result is flagged.
DesignResult environment_design(std::shared_ptr<const Environment> env_template,
                                const InnerQuery& inner, const FallbackQuery& fallback,
                                const DesignOptions& opts, std::uint64_t seed,
                                const EdgeFeatureRanges& ranges = {});

}  // namespace cred
