// Command-line front end: enumerate equilibria (cluster), score predictions
// (predict), run closed-loop planning comparisons (plan), and verify stored
// archives (replay).

#include "eqalign/harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>
#include <string>

namespace {

eqalign::AgentMode parse_mode(const std::string& mode, bool predict) {
  if (mode == "map-aligned" || (predict && mode == "inference")) {
    return eqalign::AgentMode::kMapAligned;
  }
  if (mode == "random-baseline") return eqalign::AgentMode::kRandomBaseline;
  throw CLI::ValidationError("--mode", "unknown mode: " + mode);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"N-player differential game simulator with equilibrium "
               "inference and MAP-aligned planning"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string mode = "map-aligned";
  std::string archive_dir;
  int runs = 30;
  int samples = 50;
  int threads = 1;
  bool seed_set = false;
  uint64_t seed = 0;

  auto add_common = [&](CLI::App* cmd, bool needs_config) {
    if (needs_config) {
      cmd->add_option("--config", config_path, "scenario config file")
          ->required()
          ->check(CLI::ExistingFile);
      cmd->add_option("--seed", seed, "override the config rng_seed")
          ->each([&](const std::string&) { seed_set = true; });
      cmd->add_option("--out", out_dir, "archive output directory");
    }
    cmd->add_option("--threads", threads, "worker threads (runs in parallel)");
  };

  auto* cluster = app.add_subcommand(
      "cluster", "solve random seeds and cluster the equilibria");
  add_common(cluster, true);
  cluster->add_option("--samples", samples, "number of seed strategies");

  auto* predict = app.add_subcommand(
      "predict", "passive observation: score receding-horizon predictions");
  add_common(predict, true);
  predict->add_option("--runs", runs, "number of simulation runs");
  predict->add_option("--mode", mode,
                      "inference | random-baseline (single random particle)");

  auto* plan = app.add_subcommand(
      "plan", "closed-loop planning with the aligned or baseline agent");
  add_common(plan, true);
  plan->add_option("--runs", runs, "number of simulation runs");
  plan->add_option("--mode", mode, "map-aligned | random-baseline");

  auto* replay = app.add_subcommand(
      "replay", "re-simulate an archive and verify it bit-exactly");
  replay->add_option("archive", archive_dir, "archive directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  add_common(replay, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(replay)) {
      const auto report = eqalign::cmd_replay(archive_dir, threads);
      if (report.passed) {
        std::cout << "replay: PASS\n";
        return 0;
      }
      std::cout << "replay: FAIL (" << report.first_divergence << ")\n";
      return 1;
    }

    eqalign::ScenarioConfig config = eqalign::ScenarioConfig::load(config_path);
    if (seed_set) config.rng_seed = seed;

    if (app.got_subcommand(cluster)) {
      const auto outcome = eqalign::cmd_cluster(config, samples, out_dir, threads);
      std::cout << "converged " << outcome.clustered_indices.size() << "/"
                << outcome.samples.size() << " samples, " << outcome.chosen_k
                << " clusters\n";
      for (int c = 0; c < outcome.report.k; ++c) {
        std::cout << "  cluster " << c << ": size "
                  << outcome.report.members[c].size() << ", handedness "
                  << outcome.report.handedness[c] << ", mean costs";
        for (double v : outcome.report.mean_player_costs[c]) {
          std::printf(" %.3f", v);
        }
        std::cout << "\n";
      }
    } else if (app.got_subcommand(predict)) {
      const auto results = eqalign::cmd_predict(
          config, runs, parse_mode(mode, true), out_dir, threads);
      const auto curve = eqalign::aggregate_prediction_error(config, results);
      double peak = 0.0;
      for (double v : curve.mse) peak = std::max(peak, v);
      std::cout << "predict (" << mode << "): " << results.size()
                << " runs, peak MSE " << peak << "\n";
    } else if (app.got_subcommand(plan)) {
      const auto results = eqalign::cmd_plan(config, runs,
                                             parse_mode(mode, false), out_dir,
                                             threads);
      const auto costs = eqalign::per_player_costs(results);
      std::cout << "plan (" << mode << "): " << results.size()
                << " runs, median costs";
      for (const auto& c : costs) std::printf(" %.3f", eqalign::median(c));
      std::cout << "\n";
    }
    return 0;
  } catch (const std::exception& e) {
    const nlohmann::json err{{"error", e.what()}};
    std::cerr << err.dump() << "\n";
    return 1;
  }
}
