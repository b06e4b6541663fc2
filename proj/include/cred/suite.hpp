#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cred/experiment.hpp"

namespace cred {

struct CellResult {
  RunSpec spec;
  std::vector<IterationLog> logs;
  std::string error;  // non-empty when the cell failed
};

struct SuiteResult {
  std::vector<CellResult> cells;  // ordered by (condition, user, seed)
  std::string csv;
  nlohmann::json summary;
};

/// Every (condition x user x seed) cell of the config. Cells run on a worker
/// pool; a failing cell is recorded and the suite continues.
std::vector<RunSpec> suite_cells(const ExperimentConfig& config, const Workspace& ws);

SuiteResult run_suite(const ExperimentConfig& config, const Workspace& ws);

/// Final-iteration mean and standard deviation per condition, over the test
/// environments (and separately the training environment), plus
/// per-iteration means of entropy and info gain.
nlohmann::json summarize(const ExperimentConfig& config, const std::vector<CellResult>& cells);

/// Writes metrics.csv, summary.json and manifest.json into `out_dir`.
void write_suite_outputs(const SuiteResult& result, const std::filesystem::path& out_dir);

}  // namespace cred
