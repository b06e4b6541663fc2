#include "cred/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

#include <spdlog/spdlog.h>

#include "cred/error.hpp"

namespace cred {

namespace {

enum Stream : std::uint64_t {
  kQueryStream = 0x7175,
  kInnerStream = 0x696e,
  kDesignStream = 0x6564,
  kMcmcStream = 0x6d63,
  kMetricStream = 0x6d74,
  kOracleStream = 0x6f72,
};

}  // namespace

QueryOutcome generate_query(const ExperimentConfig& config, Generator condition,
                            std::shared_ptr<const Environment> train,
                            const BeliefEnsemble& ensemble, PolicySolver& solver,
                            std::uint64_t seed) {
  Rng rng(derive_seed(seed, {kQueryStream}));
  auto mbp = [&](std::shared_ptr<const Environment> env) {
    Rng local(derive_seed(seed, {kQueryStream, 1}));
    return mean_belief_query(std::move(env), ensemble, config.query, solver, local);
  };

  QueryOutcome out;
  switch (condition) {
    case Generator::kRR:
      out.query = random_rollout_query(train, ensemble, config.query, rng);
      return out;
    case Generator::kMBP:
      out.query = mbp(train);
      return out;
    case Generator::kCR: {
      auto q = counterfactual_query(train, ensemble, config.query, solver, rng);
      if (q) {
        out.query = std::move(*q);
      } else {
        spdlog::debug("counterfactual query degenerate; falling back to MBP");
        out.query = mbp(train);
        out.fallback = true;
      }
      return out;
    }
    case Generator::kCRED:
    case Generator::kMBPED: {
      const bool cr = condition == Generator::kCRED;
      // Every proposal reuses the same inner random stream, so F(theta) is a
      // deterministic function of theta within a round.
      const InnerQuery inner =
          [&](std::shared_ptr<const Environment> env) -> std::optional<PreferenceQuery> {
        Rng local(derive_seed(seed, {kInnerStream}));
        if (cr) return counterfactual_query(std::move(env), ensemble, config.query, solver, local);
        return mean_belief_query(std::move(env), ensemble, config.query, solver, local);
      };
      DesignResult design = environment_design(train, inner, mbp, config.design,
                                               derive_seed(seed, {kDesignStream}),
                                               config.edge_ranges);
      out.fallback = design.fallback;
      out.design_trace = std::move(design.trace);
      out.query = std::move(*design.query);
      if (!out.fallback) out.query.generator = condition;
      return out;
    }
  }
  throw ConfigError("unhandled condition");
}

BeliefEnsemble update_belief(const ExperimentConfig& config,
                             std::span<const PreferenceRecord> records, int dim,
                             std::uint64_t seed) {
  return adaptive_metropolis(records, dim, config.mcmc, seed);
}

PreferenceRecord make_record(const PreferenceQuery& query, int label, int iteration) {
  PreferenceRecord r;
  r.phi_a = preference_features(*query.env, query.a);
  r.phi_b = preference_features(*query.env, query.b);
  r.label = label;
  r.env_id = query.env_id();
  r.iteration = iteration;
  return r;
}

std::vector<IterationLog> run_experiment(const ExperimentConfig& config, const Workspace& ws,
                                         const RunSpec& spec) {
  if (spec.user_index < 0 || spec.user_index >= static_cast<int>(ws.users.size()))
    throw ConfigError("user index out of range");
  const auto user_id = static_cast<std::uint64_t>(spec.user_index);
  const SimulatedUser user{ws.users[static_cast<std::size_t>(spec.user_index)], config.oracle_mode,
                           derive_seed(spec.seed, {kOracleStream, user_id})};
  const int dim = ws.train->feature_dim();
  PolicySolver solver(config.planner);
  std::vector<PreferenceRecord> records;

  auto evaluate = [&](IterationLog& log, const BeliefEnsemble& ensemble) {
    log.entropy = entropy(ensemble, config.metrics.entropy_grid_points);
    const bool due = log.iteration == 0 || log.iteration == config.iterations ||
                     (config.eval_every > 0 && log.iteration % config.eval_every == 0);
    const std::uint64_t metric_seed =
        derive_seed(spec.seed, {kMetricStream, user_id, static_cast<std::uint64_t>(log.iteration)});
    auto add = [&](const std::string& name, const Environment& env) {
      EnvMetrics m{name, due, {}};
      if (due) m.values = evaluate_policies(ensemble, user.w_true, env, config.metrics, solver, metric_seed);
      log.metrics.push_back(m);
    };
    if (config.eval_train) add("train", *ws.train);
    for (const auto& [name, env] : ws.tests) add(name, *env);
  };

  std::vector<IterationLog> logs;
  auto start = std::chrono::steady_clock::now();
  BeliefEnsemble ensemble =
      update_belief(config, records, dim, derive_seed(spec.seed, {kMcmcStream, user_id, 0}));
  {
    IterationLog log;
    evaluate(log, ensemble);
    log.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    logs.push_back(std::move(log));
  }

  for (int it = 1; it <= config.iterations; ++it) {
    start = std::chrono::steady_clock::now();
    const auto iter = static_cast<std::uint64_t>(it);
    QueryOutcome outcome = generate_query(config, spec.condition, ws.train, ensemble, solver,
                                          derive_seed(spec.seed, {kQueryStream, user_id, iter}));
    const PreferenceQuery& q = outcome.query;
    const int label = simulated_preference(user, preference_features(*q.env, q.a),
                                           preference_features(*q.env, q.b), iter);
    records.push_back(make_record(q, label, it));
    ensemble = update_belief(config, records, dim, derive_seed(spec.seed, {kMcmcStream, user_id, iter}));

    IterationLog log;
    log.iteration = it;
    log.info_gain = q.info_gain;
    log.label = label;
    log.fallback = outcome.fallback;
    log.query = std::move(outcome.query);
    evaluate(log, ensemble);
    log.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    logs.push_back(std::move(log));
  }
  return logs;
}

std::string csv_header() {
  return "iteration,condition,seed,user,env,entropy,reward_diff,policy_acc,jaccard,info_gain";
}

std::string format_metric(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void write_csv_rows(std::ostream& out, const RunSpec& spec, std::span<const IterationLog> logs) {
  for (const IterationLog& log : logs)
    for (const EnvMetrics& m : log.metrics) {
      out << log.iteration << ',' << generator_name(spec.condition) << ',' << spec.seed << ','
          << spec.user_index << ',' << m.env << ',' << format_metric(log.entropy) << ',';
      if (m.evaluated)
        out << format_metric(m.values.reward_diff) << ',' << format_metric(m.values.policy_acc) << ','
            << format_metric(m.values.jaccard);
      else
        out << ",,";
      out << ',' << format_metric(log.info_gain) << '\n';
    }
}

}  // namespace cred
