#pragma once

#include "eqalign/archive.hpp"
#include "eqalign/scenario.hpp"
#include "eqalign/simulation.hpp"

#include <string>
#include <vector>

namespace eqalign {

// Samples seed strategies, solves each to convergence, and clusters the
// converged trajectories. cluster_k == 0 in the config selects k by the
// elbow criterion.
ClusterOutcome run_cluster_experiment(const ScenarioConfig& config,
                                      int samples, int threads);

// Independent closed-loop runs (parallelized over runs; each run derives its
// own RNG stream from the master seed, so results do not depend on the
// thread count).
std::vector<RunResult> run_experiment(const ScenarioConfig& config,
                                      const SimulationOptions& options,
                                      int runs, int threads);

struct ErrorCurve {
  std::vector<double> offset_seconds;
  std::vector<double> mse;
  std::vector<double> sem;
};

// Mean squared joint-position prediction error per look-ahead offset,
// aggregated over all prediction origins of each run; the standard error is
// taken across runs.
ErrorCurve aggregate_prediction_error(const ScenarioConfig& config,
                                      const std::vector<RunResult>& runs);

// Per-player cost samples across runs: result[p][r].
std::vector<std::vector<double>> per_player_costs(
    const std::vector<RunResult>& runs);

double median(std::vector<double> values);

// CLI entry points. Each writes an archive plus CSV summaries under out_dir
// (skipped when out_dir is empty) and returns the produced data.
ClusterOutcome cmd_cluster(const ScenarioConfig& config, int samples,
                           const std::string& out_dir, int threads);
std::vector<RunResult> cmd_predict(const ScenarioConfig& config, int runs,
                                   AgentMode mode, const std::string& out_dir,
                                   int threads);
std::vector<RunResult> cmd_plan(const ScenarioConfig& config, int runs,
                                AgentMode mode, const std::string& out_dir,
                                int threads);
ReplayReport cmd_replay(const std::string& archive_dir, int threads);

}  // namespace eqalign
