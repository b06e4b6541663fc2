#include "cred/suite.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "cred/error.hpp"

namespace cred {

std::vector<RunSpec> suite_cells(const ExperimentConfig& config, const Workspace& ws) {
  std::vector<RunSpec> cells;
  for (Generator g : config.conditions)
    for (int u = 0; u < static_cast<int>(ws.users.size()); ++u)
      for (std::uint64_t s : config.seeds) cells.push_back(RunSpec{g, u, s});
  return cells;
}

namespace {

struct Accumulator {
  std::vector<double> values;
  void add(double v) { values.push_back(v); }
  nlohmann::json stats() const {
    if (values.empty()) return {{"mean", nullptr}, {"std", nullptr}, {"n", 0}};
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size());
    return {{"mean", mean}, {"std", std::sqrt(var)}, {"n", values.size()}};
  }
};

// Metric values are summarized as printed in the CSV so that the summary
// equals the CSV column means.
double as_printed(double v) { return std::stod(format_metric(v)); }

}  // namespace

nlohmann::json summarize(const ExperimentConfig& config, const std::vector<CellResult>& cells) {
  nlohmann::json out;
  out["final_iteration"] = config.iterations;
  nlohmann::json conditions = nlohmann::json::object();
  for (Generator g : config.conditions) {
    Accumulator test_rd, test_pa, test_j, train_rd, train_pa, train_j, ent;
    std::map<int, Accumulator> gain_by_iter, entropy_by_iter;
    int failed = 0;
    for (const CellResult& cell : cells) {
      if (cell.spec.condition != g) continue;
      if (!cell.error.empty()) {
        ++failed;
        continue;
      }
      for (const IterationLog& log : cell.logs) {
        if (log.iteration > 0) gain_by_iter[log.iteration].add(as_printed(log.info_gain));
        if (std::isfinite(log.entropy)) entropy_by_iter[log.iteration].add(as_printed(log.entropy));
      }
      const IterationLog& last = cell.logs.back();
      if (std::isfinite(last.entropy)) ent.add(as_printed(last.entropy));
      for (const EnvMetrics& m : last.metrics) {
        if (!m.evaluated) continue;
        const bool train = m.env == "train";
        (train ? train_rd : test_rd).add(as_printed(m.values.reward_diff));
        (train ? train_pa : test_pa).add(as_printed(m.values.policy_acc));
        (train ? train_j : test_j).add(as_printed(m.values.jaccard));
      }
    }
    nlohmann::json c;
    c["test"] = {{"reward_diff", test_rd.stats()}, {"policy_acc", test_pa.stats()},
                 {"jaccard", test_j.stats()}};
    c["train"] = {{"reward_diff", train_rd.stats()}, {"policy_acc", train_pa.stats()},
                  {"jaccard", train_j.stats()}};
    c["final_entropy"] = ent.stats();
    nlohmann::json gains = nlohmann::json::array(), ents = nlohmann::json::array();
    for (const auto& [it, acc] : gain_by_iter) gains.push_back({{"iteration", it}, {"info_gain", acc.stats()}});
    for (const auto& [it, acc] : entropy_by_iter) ents.push_back({{"iteration", it}, {"entropy", acc.stats()}});
    c["info_gain_by_iteration"] = gains;
    c["entropy_by_iteration"] = ents;
    c["failed_cells"] = failed;
    conditions[generator_name(g)] = c;
  }
  out["conditions"] = conditions;
  return out;
}

SuiteResult run_suite(const ExperimentConfig& config, const Workspace& ws) {
  const std::vector<RunSpec> specs = suite_cells(config, ws);
  SuiteResult result;
  result.cells.resize(specs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < specs.size(); i = next++) {
      CellResult& cell = result.cells[i];
      cell.spec = specs[i];
      try {
        cell.logs = run_experiment(config, ws, specs[i]);
      } catch (const std::exception& e) {
        cell.error = e.what();
        spdlog::error("cell {} user {} seed {} failed: {}", generator_name(specs[i].condition),
                      specs[i].user_index, specs[i].seed, e.what());
      }
    }
  };
  unsigned threads = config.threads > 0 ? static_cast<unsigned>(config.threads)
                                        : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(specs.size(), 1)));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }

  std::ostringstream csv;
  csv << csv_header() << '\n';
  for (const CellResult& cell : result.cells)
    if (cell.error.empty()) write_csv_rows(csv, cell.spec, cell.logs);
  result.csv = csv.str();
  result.summary = summarize(config, result.cells);
  nlohmann::json errors = nlohmann::json::array();
  for (const CellResult& cell : result.cells)
    if (!cell.error.empty())
      errors.push_back({{"condition", generator_name(cell.spec.condition)},
                        {"user", cell.spec.user_index},
                        {"seed", cell.spec.seed},
                        {"error", cell.error}});
  result.summary["errors"] = errors;
  return result;
}

void write_suite_outputs(const SuiteResult& result, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream f(out_dir / "metrics.csv");
    f << result.csv;
  }
  {
    std::ofstream f(out_dir / "summary.json");
    f << result.summary.dump(2) << '\n';
  }
  nlohmann::json manifest{
      {"metrics_csv", "metrics.csv"},
      {"summary", "summary.json"},
      {"columns", {"iteration", "condition", "seed", "user", "env", "entropy", "reward_diff",
                   "policy_acc", "jaccard", "info_gain"}},
      {"plots",
       {{{"name", "belief_entropy"}, {"x", "iteration"}, {"y", "entropy"}, {"group", "condition"}},
        {{"name", "info_gain"}, {"x", "iteration"}, {"y", "info_gain"}, {"group", "condition"}},
        {{"name", "test_metrics"}, {"x", "condition"}, {"y", {"reward_diff", "policy_acc", "jaccard"}},
         {"filter", "env != train and iteration == final"}}}}};
  std::ofstream f(out_dir / "manifest.json");
  f << manifest.dump(2) << '\n';
}

}  // namespace cred
