#include "eqalign/harness.hpp"

#include "eqalign/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

namespace eqalign {

namespace {

namespace fs = std::filesystem;

void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(17);
  out << header << "\n";
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out << ",";
      out << row[i];
    }
    out << "\n";
  }
}

std::string mode_name(AgentMode mode) {
  return mode == AgentMode::kMapAligned ? "map-aligned" : "random-baseline";
}

AgentMode mode_from_name(const std::string& name) {
  if (name == "map-aligned") return AgentMode::kMapAligned;
  if (name == "random-baseline") return AgentMode::kRandomBaseline;
  throw std::invalid_argument("unknown mode: " + name);
}

void write_run_summary(const std::string& out_dir, const ScenarioConfig& config,
                       const std::vector<RunResult>& runs) {
  std::vector<std::vector<double>> rows;
  for (size_t r = 0; r < runs.size(); ++r) {
    std::vector<double> row{static_cast<double>(r)};
    row.insert(row.end(), runs[r].player_costs.begin(),
               runs[r].player_costs.end());
    rows.push_back(std::move(row));
  }
  std::string header = "run";
  for (int p = 0; p < config.players; ++p) {
    header += ",cost_player_" + std::to_string(p);
  }
  write_csv(out_dir + "/summary.csv", header, rows);
}

}  // namespace

ClusterOutcome run_cluster_experiment(const ScenarioConfig& config,
                                      int samples, int threads) {
  config.validate();
  if (samples < 1) throw std::invalid_argument("cluster: samples must be >= 1");
  const GameDefinition game = make_game(config);
  const Vec x0 = initial_joint_state(config);
  const auto seeds = sample_seeds(config.seeds, game, samples,
                                  Rng(config.rng_seed).split(0xc1).next());

  ClusterOutcome outcome;
  outcome.samples.resize(samples);
  parallel_for(samples, threads, [&](int i) {
    ClusterSample& sample = outcome.samples[i];
    sample.index = i;
    for (const auto& s : seeds[i]) {
      sample.seed_params.push_back(s.feedforwards[0][0]);
      sample.seed_params.push_back(s.feedforwards[0][1]);
    }
    try {
      const SolveResult result = ilq_solve(game, x0, seeds[i], config.solver);
      sample.converged = result.converged;
      sample.iterations = result.iterations;
      sample.costs = result.player_costs;
      sample.trajectory = result.trajectory;
    } catch (const std::runtime_error&) {
      sample.converged = false;
    }
  });

  std::vector<Trajectory> trajectories;
  std::vector<std::vector<double>> costs;
  for (const auto& s : outcome.samples) {
    if (!s.converged) continue;
    outcome.clustered_indices.push_back(s.index);
    trajectories.push_back(s.trajectory);
    costs.push_back(s.costs);
  }
  if (trajectories.empty()) {
    throw std::runtime_error("cluster: no sample converged");
  }

  Mat features(static_cast<int>(trajectories.size()),
               trajectory_position_feature(trajectories[0], config.players)
                   .size());
  for (size_t i = 0; i < trajectories.size(); ++i) {
    features.row(static_cast<int>(i)) =
        trajectory_position_feature(trajectories[i], config.players)
            .transpose();
  }

  const uint64_t cluster_seed = Rng(config.rng_seed).split(0xc2).next();
  outcome.chosen_k =
      config.cluster_k > 0
          ? std::min(config.cluster_k, static_cast<int>(trajectories.size()))
          : select_k(features, config.cluster_k_max, cluster_seed,
                     config.cluster_elbow_threshold);
  outcome.clustering = kmeans_cluster(features, outcome.chosen_k, cluster_seed);
  outcome.report = build_cluster_report(features, outcome.clustering,
                                        trajectories, costs, config.players);
  return outcome;
}

std::vector<RunResult> run_experiment(const ScenarioConfig& config,
                                      const SimulationOptions& options,
                                      int runs, int threads) {
  if (runs < 1) throw std::invalid_argument("experiment: runs must be >= 1");
  std::vector<RunResult> results(runs);
  parallel_for(runs, threads, [&](int r) {
    results[r] = simulate_run(config, options, static_cast<uint64_t>(r));
  });
  return results;
}

ErrorCurve aggregate_prediction_error(const ScenarioConfig& config,
                                      const std::vector<RunResult>& runs) {
  const int plan_steps = config.plan_steps();
  const int sim_steps = config.sim_steps();

  ErrorCurve curve;
  curve.offset_seconds.resize(plan_steps + 1);
  for (int j = 0; j <= plan_steps; ++j) curve.offset_seconds[j] = j * config.dt;

  // Per-run mean at each offset, then mean and standard error across runs.
  Mat run_means(static_cast<int>(runs.size()), plan_steps + 1);
  for (size_t r = 0; r < runs.size(); ++r) {
    std::vector<double> sum(plan_steps + 1, 0.0);
    std::vector<int> count(plan_steps + 1, 0);
    for (const auto& pred : runs[r].predictions) {
      for (int j = 0; j < static_cast<int>(pred.positions.size()); ++j) {
        const int target = pred.origin_step + j;
        if (target > sim_steps) break;
        const Vec actual_pos = [&] {
          const Vec& x = runs[r].steps[target].x;
          Vec p(2 * config.players);
          for (int i = 0; i < config.players; ++i) {
            p.segment<2>(2 * i) = x.segment<2>(4 * i);
          }
          return p;
        }();
        sum[j] += (pred.positions[j] - actual_pos).squaredNorm();
        ++count[j];
      }
    }
    for (int j = 0; j <= plan_steps; ++j) {
      run_means(static_cast<int>(r), j) =
          count[j] > 0 ? sum[j] / count[j] : 0.0;
    }
  }

  curve.mse.resize(plan_steps + 1);
  curve.sem.resize(plan_steps + 1);
  const int R = static_cast<int>(runs.size());
  for (int j = 0; j <= plan_steps; ++j) {
    const double mean = run_means.col(j).mean();
    curve.mse[j] = mean;
    double var = 0.0;
    for (int r = 0; r < R; ++r) {
      const double d = run_means(r, j) - mean;
      var += d * d;
    }
    curve.sem[j] = R > 1 ? std::sqrt(var / (R - 1)) / std::sqrt(R) : 0.0;
  }
  return curve;
}

std::vector<std::vector<double>> per_player_costs(
    const std::vector<RunResult>& runs) {
  if (runs.empty()) return {};
  std::vector<std::vector<double>> out(runs[0].player_costs.size());
  for (const auto& run : runs) {
    for (size_t p = 0; p < run.player_costs.size(); ++p) {
      out[p].push_back(run.player_costs[p]);
    }
  }
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of empty set");
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  return n % 2 == 1 ? values[n / 2]
                    : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

ClusterOutcome cmd_cluster(const ScenarioConfig& config, int samples,
                           const std::string& out_dir, int threads) {
  ClusterOutcome outcome = run_cluster_experiment(config, samples, threads);
  if (!out_dir.empty()) {
    Archive archive;
    archive.meta.command = "cluster";
    archive.meta.count = samples;
    archive.config_text = config.serialize();
    archive.cluster = outcome;
    write_archive(out_dir, archive);

    std::vector<std::vector<double>> rows;
    for (int c = 0; c < outcome.report.k; ++c) {
      std::vector<double> row{static_cast<double>(c),
                              static_cast<double>(outcome.report.members[c].size()),
                              static_cast<double>(outcome.report.representative[c]),
                              outcome.report.handedness[c]};
      row.insert(row.end(), outcome.report.mean_player_costs[c].begin(),
                 outcome.report.mean_player_costs[c].end());
      rows.push_back(std::move(row));
    }
    std::string header = "cluster,size,representative,handedness";
    for (int p = 0; p < config.players; ++p) {
      header += ",mean_cost_player_" + std::to_string(p);
    }
    write_csv(out_dir + "/clusters.csv", header, rows);
  }
  return outcome;
}

namespace {

std::vector<RunResult> cmd_simulated(const ScenarioConfig& config, int runs,
                                     AgentMode mode, ExperimentKind kind,
                                     const std::string& out_dir, int threads) {
  SimulationOptions options;
  options.kind = kind;
  options.mode = mode;
  auto results = run_experiment(config, options, runs, threads);

  if (!out_dir.empty()) {
    Archive archive;
    archive.meta.command = kind == ExperimentKind::kPlan ? "plan" : "predict";
    archive.meta.mode = mode_name(mode);
    archive.meta.count = runs;
    archive.config_text = config.serialize();
    archive.runs = results;
    write_archive(out_dir, archive);
    write_run_summary(out_dir, config, results);

    if (kind == ExperimentKind::kPredict) {
      const ErrorCurve curve = aggregate_prediction_error(config, results);
      std::vector<std::vector<double>> rows;
      for (size_t j = 0; j < curve.mse.size(); ++j) {
        rows.push_back({curve.offset_seconds[j], curve.mse[j], curve.sem[j]});
      }
      write_csv(out_dir + "/prediction_error.csv", "offset_s,mse,sem", rows);
    }
  }
  return results;
}

}  // namespace

std::vector<RunResult> cmd_predict(const ScenarioConfig& config, int runs,
                                   AgentMode mode, const std::string& out_dir,
                                   int threads) {
  return cmd_simulated(config, runs, mode, ExperimentKind::kPredict, out_dir,
                       threads);
}

std::vector<RunResult> cmd_plan(const ScenarioConfig& config, int runs,
                                AgentMode mode, const std::string& out_dir,
                                int threads) {
  return cmd_simulated(config, runs, mode, ExperimentKind::kPlan, out_dir,
                       threads);
}

ReplayReport cmd_replay(const std::string& archive_dir, int threads) {
  const Archive archive = read_archive(archive_dir);
  if (archive.meta.version != kVersionTag) {
    return {false, "archive version " + archive.meta.version +
                       " does not match " + kVersionTag};
  }
  const ScenarioConfig config = ScenarioConfig::parse(archive.config_text);

  if (archive.meta.command == "cluster") {
    const ClusterOutcome fresh =
        run_cluster_experiment(config, archive.meta.count, threads);
    return compare_cluster(archive.cluster, fresh);
  }

  SimulationOptions options;
  options.kind = archive.meta.command == "plan" ? ExperimentKind::kPlan
                                                : ExperimentKind::kPredict;
  options.mode = mode_from_name(archive.meta.mode);
  options.ground_truth_particle = archive.meta.ground_truth_particle;
  const auto fresh =
      run_experiment(config, options, archive.meta.count, threads);
  return compare_runs(archive.runs, fresh);
}

}  // namespace eqalign
