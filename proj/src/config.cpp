#include "cred/config.hpp"

#include <fstream>

#include "cred/error.hpp"
#include "cred/serialization.hpp"

namespace cred {

const char* domain_name(Domain d) { return d == Domain::kGraph ? "graph" : "gridworld"; }

void ExperimentConfig::validate() const {
  if (iterations < 1) throw ConfigError("iterations must be >= 1");
  if (conditions.empty()) throw ConfigError("at least one condition is required");
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (test_envs.empty()) throw ConfigError("at least one test environment is required");
  if (domain == Domain::kGridWorld && train_env.empty())
    throw ConfigError("gridworld experiments need a training environment file");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in [0,1)");
  if (planner.tol <= 0.0) throw ConfigError("planner tolerance must be positive");
  if (mcmc.n_samples < 1 || mcmc.burn_in < 0 || mcmc.thin < 1)
    throw ConfigError("mcmc needs n_samples >= 1, burn_in >= 0, thin >= 1");
  if (query.n_diverse < 2 || query.n_weights < query.n_diverse)
    throw ConfigError("query needs N >= M >= 2");
  if (query.n_rollouts < 2) throw ConfigError("query needs K >= 2");
  if (!(query.epsilon >= 0.0 && query.epsilon <= 1.0)) throw ConfigError("epsilon must lie in [0,1]");
  if (design.iterations < 1) throw ConfigError("design iterations must be >= 1");
  if (design.kappa < 0.0) throw ConfigError("kappa must be non-negative");
  if (metrics.n_eval < 1) throw ConfigError("metrics n_eval must be >= 1");
  if (eval_every < 0) throw ConfigError("eval_every must be >= 0");
  if (users.empty() && users_path.empty() && (n_users < 1 || n_users > user_pool))
    throw ConfigError("need 1 <= n_users <= user_pool");
}

namespace {

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

ExperimentConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
  ExperimentConfig c;
  c.base_dir = base_dir;
  try {
    if (j.contains("domain")) {
      const auto d = j.at("domain").get<std::string>();
      if (d == "gridworld" || d == "grid") c.domain = Domain::kGridWorld;
      else if (d == "graph" || d == "osm") c.domain = Domain::kGraph;
      else throw ConfigError("unknown domain '" + d + "'");
    }
    if (j.contains("conditions")) {
      c.conditions.clear();
      for (const auto& n : j.at("conditions")) c.conditions.push_back(generator_from_name(n.get<std::string>()));
    } else if (j.contains("condition")) {
      c.conditions = {generator_from_name(j.at("condition").get<std::string>())};
    }
    read(j, "iterations", c.iterations);
    if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    else if (j.contains("seed")) c.seeds = {j.at("seed").get<std::uint64_t>()};
    if (j.contains("oracle")) c.oracle_mode = response_mode_from_name(j.at("oracle").get<std::string>());
    if (j.contains("users")) c.users = weights_from_json(j.at("users"));
    read(j, "users_path", c.users_path);
    read(j, "n_users", c.n_users);
    read(j, "user_pool", c.user_pool);
    read(j, "user_seed", c.user_seed);
    read(j, "train_env", c.train_env);
    read(j, "train_graph_seed", c.train_graph_seed);
    if (j.contains("test_envs")) c.test_envs = j.at("test_envs").get<std::vector<std::string>>();
    read(j, "gamma", c.gamma);
    if (j.contains("horizon") && !j.at("horizon").is_null()) c.horizon = j.at("horizon").get<int>();
    read(j, "threads", c.threads);
    if (j.contains("planner")) {
      const auto& p = j.at("planner");
      read(p, "tol", c.planner.tol);
      read(p, "goal_bonus", c.planner.goal_bonus);
    }
    if (j.contains("mcmc")) {
      const auto& m = j.at("mcmc");
      read(m, "n_samples", c.mcmc.n_samples);
      read(m, "burn_in", c.mcmc.burn_in);
      read(m, "thin", c.mcmc.thin);
    }
    if (j.contains("query")) {
      const auto& q = j.at("query");
      read(q, "N", c.query.n_weights);
      read(q, "M", c.query.n_diverse);
      read(q, "K", c.query.n_rollouts);
      read(q, "epsilon", c.query.epsilon);
    }
    if (j.contains("design")) {
      const auto& d = j.at("design");
      read(d, "iterations", c.design.iterations);
      read(d, "initial_random", c.design.initial_random);
      read(d, "kappa", c.design.kappa);
      read(d, "n_candidates", c.design.n_candidates);
      read(d, "jitter_fraction", c.design.jitter_fraction);
      read(d, "fit_hyperparams", c.design.fit_hyperparams);
    }
    if (j.contains("metrics")) {
      const auto& m = j.at("metrics");
      read(m, "n_eval", c.metrics.n_eval);
      read(m, "entropy_grid_points", c.metrics.entropy_grid_points);
      read(m, "eval_every", c.eval_every);
      read(m, "eval_train", c.eval_train);
    }
    if (j.contains("edge_ranges")) {
      const auto& r = j.at("edge_ranges");
      read(r, "distance_lo", c.edge_ranges.distance_lo);
      read(r, "distance_hi", c.edge_ranges.distance_hi);
      read(r, "time_lo", c.edge_ranges.time_lo);
      read(r, "time_hi", c.edge_ranges.time_hi);
      read(r, "elevation_lo", c.edge_ranges.elevation_lo);
      read(r, "elevation_hi", c.edge_ranges.elevation_hi);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

json config_to_json(const ExperimentConfig& c) {
  json conds = json::array();
  for (Generator g : c.conditions) conds.push_back(generator_name(g));
  json j{{"domain", domain_name(c.domain)},
         {"conditions", conds},
         {"iterations", c.iterations},
         {"seeds", c.seeds},
         {"oracle", response_mode_name(c.oracle_mode)},
         {"n_users", c.n_users},
         {"user_pool", c.user_pool},
         {"user_seed", c.user_seed},
         {"train_env", c.train_env},
         {"train_graph_seed", c.train_graph_seed},
         {"test_envs", c.test_envs},
         {"gamma", c.gamma},
         {"threads", c.threads},
         {"planner", {{"tol", c.planner.tol}, {"goal_bonus", c.planner.goal_bonus}}},
         {"mcmc", {{"n_samples", c.mcmc.n_samples}, {"burn_in", c.mcmc.burn_in}, {"thin", c.mcmc.thin}}},
         {"query", {{"N", c.query.n_weights}, {"M", c.query.n_diverse}, {"K", c.query.n_rollouts},
                    {"epsilon", c.query.epsilon}}},
         {"design", {{"iterations", c.design.iterations}, {"initial_random", c.design.initial_random},
                     {"kappa", c.design.kappa}, {"n_candidates", c.design.n_candidates},
                     {"jitter_fraction", c.design.jitter_fraction},
                     {"fit_hyperparams", c.design.fit_hyperparams}}},
         {"metrics", {{"n_eval", c.metrics.n_eval},
                      {"entropy_grid_points", c.metrics.entropy_grid_points},
                      {"eval_every", c.eval_every}, {"eval_train", c.eval_train}}},
         {"edge_ranges", {{"distance_lo", c.edge_ranges.distance_lo},
                          {"distance_hi", c.edge_ranges.distance_hi},
                          {"time_lo", c.edge_ranges.time_lo},
                          {"time_hi", c.edge_ranges.time_hi},
                          {"elevation_lo", c.edge_ranges.elevation_lo},
                          {"elevation_hi", c.edge_ranges.elevation_hi}}}};
  if (c.horizon) j["horizon"] = *c.horizon;
  if (!c.users.empty()) j["users"] = weights_to_json(c.users);
  if (!c.users_path.empty()) j["users_path"] = c.users_path;
  return j;
}

namespace {

std::filesystem::path resolve(const ExperimentConfig& c, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !c.base_dir.empty()) path = c.base_dir / path;
  return path;
}

std::shared_ptr<const Environment> load_with_overrides(const ExperimentConfig& c,
                                                       const std::string& p) {
  std::ifstream in(resolve(c, p));
  if (!in) throw ConfigError("cannot open environment " + resolve(c, p).string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(p + ": " + e.what());
  }
  if (!j.contains("gamma")) j["gamma"] = c.gamma;
  if (c.horizon && !j.contains("horizon")) j["horizon"] = *c.horizon;
  auto env = std::make_shared<const Environment>(environment_from_json(j));
  const bool want_grid = c.domain == Domain::kGridWorld;
  if (env->is_grid() != want_grid)
    throw ConfigError("environment " + p + " does not match the configured domain");
  return env;
}

}  // namespace

Workspace load_workspace(const ExperimentConfig& config) {
  config.validate();
  Workspace ws;
  if (!config.train_env.empty()) {
    ws.train = load_with_overrides(config, config.train_env);
  } else {
    ws.train = std::make_shared<const Environment>(Environment::from_graph(
        sample_training_graph(config.train_graph_seed, config.edge_ranges), config.gamma,
        config.horizon));
  }
  for (const auto& p : config.test_envs)
    ws.tests.emplace_back(std::filesystem::path(p).stem().string(), load_with_overrides(config, p));

  if (!config.users.empty()) {
    ws.users = config.users;
  } else if (!config.users_path.empty()) {
    std::ifstream in(resolve(config, config.users_path));
    if (!in) throw ConfigError("cannot open users file " + config.users_path);
    json j;
    in >> j;
    ws.users = weights_from_json(j.is_object() ? j.at("users") : j);
  } else {
    ws.users = ground_truth_weights(config.n_users, config.user_pool, ws.train->feature_dim(),
                                    config.user_seed);
  }
  for (const auto& w : ws.users)
    if (w.size() != ws.train->feature_dim())
      throw ConfigError("user weights do not match the environment feature dimension");
  return ws;
}

}  // namespace cred
