#pragma once

#include "colearn/config.hpp"
#include "colearn/experiment.hpp"

#include <string>
#include <vector>

namespace colearn {

// Materialized datasets for one config: per-agent partitions plus the
// held-out evaluation pool.
struct PreparedData {
    ModelArchitecture arch;
    std::vector<AgentDataset> agents;
    std::vector<std::string> agent_subjects;
    std::vector<SensorWindow> global_eval;
    std::vector<std::string> test_subjects;
};

// Loads the window cache when present and valid, otherwise builds from the
// dataset files (or the synthetic generator). `used_cache`, when non-null,
// reports which path was taken.
PreparedData materialize_data(const RunConfig& config, bool* used_cache = nullptr);

// Builds and persists the window cache; a valid existing cache makes this
// a no-op. Returns the cache directory.
std::string cmd_prepare(const RunConfig& config);

// Runs the configured experiment and writes results, summary, round log,
// canonical config and final checkpoints under
// <out_dir>/<experiment_id>/. Returns that directory. Re-running the same
// config and seed rewrites byte-identical metric CSVs.
std::string cmd_run(const RunConfig& config);

// Joins the results of several run directories (same dataset and scope)
// into a plot-ready long CSV and a per-epoch comparison table with a
// relative-improvement column when collab and isolated runs are both
// present. Returns the comparison CSV path.
std::string cmd_compare(const std::vector<std::string>& run_dirs, const std::string& out_dir);

}  // namespace colearn
