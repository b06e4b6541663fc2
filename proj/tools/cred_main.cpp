// Command-line front end: experiments, suites, OSM conversion and the
// elicitation service.

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "cred/config.hpp"
#include "cred/error.hpp"
#include "cred/osm.hpp"
#include "cred/serialization.hpp"
#include "cred/service.hpp"
#include "cred/suite.hpp"

namespace {

void write_query_logs(const cred::SuiteResult& result, const std::filesystem::path& out) {
  cred::json runs = cred::json::array();
  for (const auto& cell : result.cells) {
    cred::json iters = cred::json::array();
    for (const auto& log : cell.logs) {
      if (!log.query) continue;
      iters.push_back({{"iteration", log.iteration},
                       {"label", log.label},
                       {"fallback", log.fallback},
                       {"wall_time_s", log.wall_time_s},
                       {"query", cred::query_to_json(*log.query, true)}});
    }
    runs.push_back({{"condition", cred::generator_name(cell.spec.condition)},
                    {"user", cell.spec.user_index},
                    {"seed", cell.spec.seed},
                    {"error", cell.error},
                    {"iterations", iters}});
  }
  std::ofstream f(out / "queries.json");
  f << runs.dump() << '\n';
}

int run_suite_command(const std::string& config_path, std::optional<std::uint64_t> seed,
                      const std::string& out_dir, bool query_logs) {
  cred::ExperimentConfig config = cred::load_config(config_path);
  if (seed) config.seeds = {*seed};
  const cred::Workspace ws = cred::load_workspace(config);
  spdlog::info("{} condition(s) x {} user(s) x {} seed(s), {} iterations", config.conditions.size(),
               ws.users.size(), config.seeds.size(), config.iterations);
  const cred::SuiteResult result = cred::run_suite(config, ws);
  cred::write_suite_outputs(result, out_dir);
  if (query_logs) write_query_logs(result, out_dir);
  {
    std::ofstream f(std::filesystem::path(out_dir) / "config.json");
    f << cred::config_to_json(config).dump(2) << '\n';
  }
  spdlog::info("wrote {}", (std::filesystem::path(out_dir) / "metrics.csv").string());
  return result.summary["errors"].empty() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active preference learning with counterfactual queries and environment design"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error")->capture_default_str();

  std::string config_path, out_dir = "results";
  std::optional<std::uint64_t> seed;
  auto* run = app.add_subcommand("run", "Run the configured experiment for one seed");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Override the config's seeds");
  run->add_option("--out", out_dir, "Output directory")->capture_default_str();

  auto* suite = app.add_subcommand("suite", "Run every condition x user x seed cell");
  suite->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  suite->add_option("--out", out_dir, "Output directory")->capture_default_str();

  std::string osm_in, osm_out, center;
  cred::OsmOptions osm;
  auto* convert = app.add_subcommand("convert-osm", "Convert an OSM XML extract to a graph environment");
  convert->add_option("--in", osm_in, "OSM XML file")->required()->check(CLI::ExistingFile);
  convert->add_option("--radius", osm.radius_m, "Radius around the center (m)")->required();
  convert->add_option("--center", center, "Center as lat,lon")->required();
  convert->add_option("--out", osm_out, "Output environment JSON")->required();
  convert->add_option("--distance-unit", osm.distance_unit_m, "Meters per distance unit")->capture_default_str();
  convert->add_option("--time-unit", osm.time_unit_s, "Seconds per time unit")->capture_default_str();
  convert->add_option("--elevation-unit", osm.elevation_unit_m, "Meters per elevation unit")->capture_default_str();

  std::string bind = "127.0.0.1:8080", state_dir = "sessions", ui_dir;
  auto* serve = app.add_subcommand("serve", "Serve live elicitation sessions over HTTP");
  serve->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  serve->add_option("--bind", bind, "host:port")->capture_default_str();
  serve->add_option("--state-dir", state_dir, "Session persistence directory")->capture_default_str();
  serve->add_option("--ui-dir", ui_dir, "Static frontend directory");

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*run) return run_suite_command(config_path, seed, out_dir, true);
    if (*suite) return run_suite_command(config_path, std::nullopt, out_dir, false);
    if (*convert) {
      std::tie(osm.center_lat, osm.center_lon) = cred::parse_lat_lon(center);
      const cred::StreetGraph g = cred::osm_to_graph(std::filesystem::path(osm_in), osm);
      const cred::Environment env = cred::Environment::from_graph(g);
      cred::save_environment(env, osm_out);
      spdlog::info("{} nodes, {} edges -> {}", g.nodes.size(), g.edges.size(), osm_out);
      return 0;
    }
    if (*serve) {
      cred::ExperimentConfig config = cred::load_config(config_path);
      cred::Workspace ws = cred::load_workspace(config);
      cred::SessionService service(std::move(config), std::move(ws), state_dir);
      cred::serve(service, bind, ui_dir);
      return 0;
    }
  } catch (const cred::Error& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
