#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "cred/config.hpp"

namespace cred {

/// A query plus how it was produced.
struct QueryOutcome {
  PreferenceQuery query;
  bool fallback = false;          // degenerate generator; MBP in the training environment
  std::vector<TraceEntry> design_trace;
};

/// One query for `condition` under the current belief. CR falls back to MBP
/// when counterfactual rollouts collapse to a single trajectory; the ED
/// conditions run the outer design loop around CR (CRED) or MBP (MBP+ED).
QueryOutcome generate_query(const ExperimentConfig& config, Generator condition,
                            std::shared_ptr<const Environment> train,
                            const BeliefEnsemble& ensemble, PolicySolver& solver,
                            std::uint64_t seed);

/// Posterior re-sampled from scratch over all records.
BeliefEnsemble update_belief(const ExperimentConfig& config,
                             std::span<const PreferenceRecord> records, int dim,
                             std::uint64_t seed);

PreferenceRecord make_record(const PreferenceQuery& query, int label, int iteration);

struct EnvMetrics {
  std::string env;       // "train" or the test environment's name
  bool evaluated = false;
  PolicyMetrics values;
};

struct IterationLog {
  int iteration = 0;
  std::optional<PreferenceQuery> query;  // absent at iteration 0
  int label = 0;
  double info_gain = 0.0;
  double entropy = 0.0;
  bool fallback = false;
  std::vector<EnvMetrics> metrics;
  double wall_time_s = 0.0;
};

struct RunSpec {
  Generator condition = Generator::kCRED;
  int user_index = 0;
  std::uint64_t seed = 0;
};

/// The full active-learning loop for one (condition, user, seed). Row 0 is
/// the prior belief; rows 1..iterations follow each answered query.
std::vector<IterationLog> run_experiment(const ExperimentConfig& config, const Workspace& ws,
                                         const RunSpec& spec);

/// Column header of the metrics CSV.
std::string csv_header();

/// CSV rows of one run (one row per iteration and environment).
void write_csv_rows(std::ostream& out, const RunSpec& spec, std::span<const IterationLog> logs);

/// Formats a metric value the way the CSV does.
std::string format_metric(double v);

}  // namespace cred
