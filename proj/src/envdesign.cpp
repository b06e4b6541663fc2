#include "cred/envdesign.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "cred/error.hpp"

namespace cred {

Eigen::VectorXd propose_theta(const GpModel& model, const Box& bounds, double kappa,
                              int n_candidates, Rng& rng, double jitter_fraction) {
  if (kappa < 0.0) throw ConfigError("UCB kappa must be non-negative");
  const int d = bounds.dim();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::VectorXd width = bounds.upper - bounds.lower;

  std::vector<Eigen::VectorXd> candidates;
  candidates.reserve(static_cast<std::size_t>(n_candidates) + 1);
  for (int c = 0; c < n_candidates; ++c) {
    Eigen::VectorXd x(d);
    for (int j = 0; j < d; ++j) x[j] = bounds.lower[j] + unit(rng) * width[j];
    candidates.push_back(std::move(x));
  }
  if (model.size() > 0) {
    const auto& ys = model.outputs();
    const auto best = std::distance(ys.begin(), std::max_element(ys.begin(), ys.end()));
    Eigen::VectorXd x = model.inputs()[static_cast<std::size_t>(best)];
    for (int j = 0; j < d; ++j) x[j] += jitter_fraction * width[j] * normal(rng);
    candidates.push_back(bounds.clip(std::move(x)));
  }
  if (candidates.empty()) throw ConfigError("acquisition needs at least one candidate");

  std::size_t arg = 0;
  double best_ucb = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const GpPrediction p = model.predict(candidates[c]);
    const double ucb = p.mean + kappa * p.stddev;
    if (ucb > best_ucb) {
      best_ucb = ucb;
      arg = c;
    }
  }
  return candidates[arg];
}

OptimizationResult bayes_optimize(const Box& bounds, const DesignObjective& objective,
                                  const DesignOptions& opts, std::uint64_t seed) {
  if (opts.iterations < 1) throw ConfigError("design needs at least one iteration");
  const int d = bounds.dim();
  const Eigen::VectorXd width = bounds.upper - bounds.lower;
  Rng rng(derive_seed(seed, {1}));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  GpHyperparams hp;
  hp.signal_variance = 1.0;
  hp.length_scales = opts.initial_length_fraction * width;
  hp.noise_variance = 1e-6;
  GpModel model(d, hp);

  OptimizationResult result;
  for (int t = 0; t < opts.iterations; ++t) {
    Eigen::VectorXd theta(d);
    if (t < opts.initial_random || model.size() == 0) {
      for (int j = 0; j < d; ++j) theta[j] = bounds.lower[j] + unit(rng) * width[j];
    } else {
      theta = propose_theta(model, bounds, opts.kappa, opts.n_candidates, rng, opts.jitter_fraction);
    }

    const auto start = std::chrono::steady_clock::now();
    const std::optional<double> value = objective(theta);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    TraceEntry entry{theta, value.value_or(0.0), value.has_value(), elapsed};
    result.trace.push_back(entry);
    if (entry.valid && (result.best < 0 || entry.value > result.trace[result.best].value))
      result.best = t;

    model.add_observation(theta, entry.value);
    if (opts.fit_hyperparams && model.size() >= 3 && t + 1 >= opts.initial_random &&
        t + 1 < opts.iterations)
      model = gp_fit_hyperparams(model, width, {}, derive_seed(seed, {2, static_cast<std::uint64_t>(t)}));
  }
  return result;
}

double DesignResult::best_value() const {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& e : trace) best = std::max(best, e.value);
  return best;
}

DesignResult environment_design(std::shared_ptr<const Environment> env_template,
                                const InnerQuery& inner, const FallbackQuery& fallback,
                                const DesignOptions& opts, std::uint64_t seed,
                                const EdgeFeatureRanges& ranges) {
  const Box bounds = param_bounds(*env_template, ranges);
  const ParamDomain domain = param_domain_for(*env_template);
  std::vector<std::optional<PreferenceQuery>> queries;

  const DesignObjective objective = [&](const Eigen::VectorXd& theta) -> std::optional<double> {
    EnvParamVector params{theta, domain, bounds};
    auto env = std::make_shared<const Environment>(decode_env(params, *env_template));
    queries.push_back(inner(std::move(env)));
    if (!queries.back()) return std::nullopt;
    return queries.back()->info_gain;
  };
  OptimizationResult opt = bayes_optimize(bounds, objective, opts, seed);

  DesignResult result;
  result.trace = std::move(opt.trace);
  if (opt.best >= 0) {
    result.best_theta = EnvParamVector{result.trace[opt.best].theta, domain, bounds};
    result.query = std::move(queries[opt.best]);
    return result;
  }
  result.fallback = true;
  if (domain == ParamDomain::kGraphEdges) {
    result.best_theta = encode_graph(*env_template, ranges);
  } else {
    result.best_theta = EnvParamVector{result.trace.front().theta, domain, bounds};
  }
  if (fallback) result.query = fallback(env_template);
  return result;
}

}  // namespace cred
