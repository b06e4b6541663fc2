#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cred/belief.hpp"
#include "cred/env.hpp"
#include "cred/envdesign.hpp"
#include "cred/metrics.hpp"
#include "cred/oracle.hpp"
#include "cred/planner.hpp"
#include "cred/querygen.hpp"

namespace cred {

enum class Domain { kGridWorld, kGraph };

/// Everything an experiment, suite or session needs. Every default can be
/// overridden from the JSON config file.
struct ExperimentConfig {
  Domain domain = Domain::kGridWorld;
  std::vector<Generator> conditions{Generator::kCRED};
  int iterations = 30;  // preference queries per run
  std::vector<std::uint64_t> seeds{0};
  ResponseMode oracle_mode = ResponseMode::kBoltzmann;

  // Ground-truth users: explicit weights, a JSON file, or K-Means generation.
  std::vector<WeightVector> users;
  std::string users_path;
  int n_users = 10;
  int user_pool = 1000;
  std::uint64_t user_seed = 0;

  std::string train_env;               // empty + graph domain: sampled training graph
  std::uint64_t train_graph_seed = 0;
  std::vector<std::string> test_envs;
  double gamma = Environment::kDefaultGamma;
  std::optional<int> horizon;

  PlannerOptions planner;
  McmcOptions mcmc;
  QueryOptions query;
  DesignOptions design;
  MetricOptions metrics;
  EdgeFeatureRanges edge_ranges;
  int eval_every = 1;  // policy metrics every k iterations (iteration 0 and the last always)
  bool eval_train = true;
  int threads = 0;     // suite workers; 0 = hardware concurrency

  std::filesystem::path base_dir;  // relative paths resolve against this

  /// Throws ConfigError on an invalid configuration.
  void validate() const;
};

const char* domain_name(Domain d);

ExperimentConfig config_from_json(const nlohmann::json& j,
                                  const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const ExperimentConfig& c);

/// Environments referenced by a config, loaded once.
struct Workspace {
  std::shared_ptr<const Environment> train;
  std::vector<std::pair<std::string, std::shared_ptr<const Environment>>> tests;
  std::vector<WeightVector> users;
};

Workspace load_workspace(const ExperimentConfig& config);

}  // namespace cred
