#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "eqalign/archive.hpp"
#include "eqalign/harness.hpp"
#include "eqalign/scenario.hpp"
#include "eqalign/simulation.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>

using namespace eqalign;
namespace fs = std::filesystem;

namespace {

ScenarioConfig fast_config() {
  ScenarioConfig cfg;
  cfg.players = 2;
  cfg.circle_radius = 3.0;
  cfg.spawn_angles_deg = {0.0, 90.0};
  cfg.plan_duration = 4.0;
  cfg.sim_duration = 0.8;
  cfg.particles = 3;
  cfg.weights.control = Eigen::Vector2d(4.0, 1.0);
  cfg.weights.velocity = 0.3;
  cfg.weights.proximity = 150.0;
  cfg.solver.convergence_tol = 1e-2;
  cfg.seeds = {-0.75, 0.75, -0.3, 0.6};
  cfg.rng_seed = 7;
  return cfg;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("eqalign_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int counter() {
    static int n = 0;
    return n++;
  }
};

bool runs_equal(const RunResult& a, const RunResult& b) {
  return compare_runs({a}, {b}).passed;
}

}  // namespace

TEST_CASE("config serialization round-trips losslessly") {
  auto cfg = fast_config();
  cfg.rng_seed = 0xdeadbeef12345678ull;
  cfg.epsilon_obs = 0.1234567890123456789;
  const std::string text = cfg.serialize();
  const ScenarioConfig parsed = ScenarioConfig::parse(text);
  CHECK(parsed.serialize() == text);
  CHECK(parsed.rng_seed == cfg.rng_seed);
  CHECK(parsed.epsilon_obs == cfg.epsilon_obs);
  CHECK(parsed.spawn_angles_deg == cfg.spawn_angles_deg);
}

TEST_CASE("config parser reports unknown keys and bad values") {
  CHECK_THROWS_WITH_AS(ScenarioConfig::parse("bogus_key = 2\n"),
                       doctest::Contains("unknown key"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(ScenarioConfig::parse("players = banana\n"),
                       doctest::Contains("bad value"), std::invalid_argument);
  CHECK_THROWS_AS(ScenarioConfig::parse("players = 1\n"),
                  std::invalid_argument);
  // horizons must divide into steps
  CHECK_THROWS_AS(ScenarioConfig::parse("dt = 0.3\nsim_duration = 1.0\n"),
                  std::invalid_argument);
  // comments and blank lines are fine
  const auto cfg = ScenarioConfig::parse("# comment\n\nplayers = 4\n");
  CHECK(cfg.players == 4);
}

TEST_CASE("standard geometry: on the circle, facing center, antipodal goals") {
  auto cfg = fast_config();
  cfg.spawn_angles_deg.clear();
  const Vec x0 = initial_joint_state(cfg);
  const auto game = make_game(cfg);
  for (int i = 0; i < cfg.players; ++i) {
    const Eigen::Vector2d p = x0.segment<2>(4 * i);
    CHECK(p.norm() == doctest::Approx(cfg.circle_radius));
    // heading points at the center
    const Eigen::Vector2d h(std::cos(x0[4 * i + 2]), std::sin(x0[4 * i + 2]));
    CHECK((p.normalized() + h).norm() == doctest::Approx(0.0).epsilon(1e-9));
    const Vec& goal = game.costs[i].goal_state();
    CHECK((goal.segment<2>(0) + p).norm() == doctest::Approx(0.0).epsilon(1e-9));
  }
}

TEST_CASE("simulation runs are bit-deterministic") {
  const auto cfg = fast_config();
  SimulationOptions opt;
  opt.kind = ExperimentKind::kPlan;
  opt.mode = AgentMode::kMapAligned;
  const RunResult a = simulate_run(cfg, opt, 0);
  const RunResult b = simulate_run(cfg, opt, 0);
  CHECK(runs_equal(a, b));

  // A different run index gives a different world.
  const RunResult c = simulate_run(cfg, opt, 1);
  CHECK_FALSE(runs_equal(a, c));
}

TEST_CASE("run archives round-trip exactly") {
  const auto cfg = fast_config();
  SimulationOptions opt;
  opt.kind = ExperimentKind::kPredict;
  opt.mode = AgentMode::kMapAligned;

  Archive archive;
  archive.meta.command = "predict";
  archive.meta.mode = "map-aligned";
  archive.meta.count = 2;
  archive.config_text = cfg.serialize();
  archive.runs.push_back(simulate_run(cfg, opt, 0));
  archive.runs.push_back(simulate_run(cfg, opt, 1));

  TempDir dir;
  write_archive(dir.path.string(), archive);
  const Archive loaded = read_archive(dir.path.string());
  CHECK(loaded.meta.command == "predict");
  CHECK(loaded.meta.count == 2);
  CHECK(loaded.config_text == archive.config_text);
  CHECK(compare_runs(archive.runs, loaded.runs).passed);
}

TEST_CASE("compare_runs pinpoints the first divergence") {
  const auto cfg = fast_config();
  SimulationOptions opt;
  opt.kind = ExperimentKind::kPredict;
  const RunResult a = simulate_run(cfg, opt, 0);
  RunResult b = a;
  b.belief[1].particles[0].weight += 1e-12;
  const ReplayReport report = compare_runs({a}, {b});
  CHECK_FALSE(report.passed);
  CHECK(report.first_divergence.find("belief[1]") != std::string::npos);

  RunResult c = a;
  c.steps[2].x[3] += 1e-9;
  const ReplayReport report2 = compare_runs({a}, {c});
  CHECK_FALSE(report2.passed);
  CHECK(report2.first_divergence.find("steps[2]") != std::string::npos);
}

TEST_CASE("cmd_plan archives replay cleanly and corruption is caught") {
  const auto cfg = fast_config();
  TempDir dir;
  cmd_plan(cfg, 2, AgentMode::kMapAligned, dir.path.string(), 1);

  const ReplayReport ok = cmd_replay(dir.path.string(), 1);
  CHECK(ok.passed);

  // Flip one stored weight; replay must fail at that record.
  const fs::path belief = dir.path / "runs" / "run_0001" / "belief.jsonl";
  std::vector<std::string> lines;
  {
    std::ifstream in(belief);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
  }
  REQUIRE(lines.size() > 1);
  auto record = nlohmann::json::parse(lines[1]);
  record["particles"][0]["logw"] =
      record["particles"][0]["logw"].get<double>() + 1e-9;
  lines[1] = record.dump();
  {
    std::ofstream out(belief);
    for (const auto& line : lines) out << line << "\n";
  }
  const ReplayReport bad = cmd_replay(dir.path.string(), 1);
  CHECK_FALSE(bad.passed);
  CHECK(bad.first_divergence.find("logw") != std::string::npos);
}

TEST_CASE("replay rejects archives from another code version") {
  const auto cfg = fast_config();
  TempDir dir;
  cmd_predict(cfg, 1, AgentMode::kRandomBaseline, dir.path.string(), 1);
  const fs::path meta = dir.path / "meta.json";
  std::ifstream in(meta);
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  in.close();
  const auto pos = content.find(kVersionTag);
  REQUIRE(pos != std::string::npos);
  content.replace(pos, std::string(kVersionTag).size(), "eqalign-0.0.0");
  std::ofstream out(meta);
  out << content;
  out.close();
  const ReplayReport report = cmd_replay(dir.path.string(), 1);
  CHECK_FALSE(report.passed);
  CHECK(report.first_divergence.find("version") != std::string::npos);
}

TEST_CASE("cluster command produces a replayable archive") {
  auto cfg = fast_config();
  cfg.cluster_k = 2;
  TempDir dir;
  const ClusterOutcome outcome = cmd_cluster(cfg, 8, dir.path.string(), 1);
  CHECK(outcome.samples.size() == 8);
  CHECK(outcome.report.k == outcome.chosen_k);
  int members = 0;
  for (const auto& m : outcome.report.members) members += (int)m.size();
  CHECK(members == (int)outcome.clustered_indices.size());

  const ReplayReport report = cmd_replay(dir.path.string(), 1);
  CHECK(report.passed);
  CHECK(fs::exists(dir.path / "clusters.csv"));
}

TEST_CASE("prediction error aggregation starts at zero offset") {
  const auto cfg = fast_config();
  SimulationOptions opt;
  opt.kind = ExperimentKind::kPredict;
  std::vector<RunResult> runs;
  runs.push_back(simulate_run(cfg, opt, 0));
  runs.push_back(simulate_run(cfg, opt, 1));
  const ErrorCurve curve = aggregate_prediction_error(cfg, runs);
  CHECK(curve.mse.size() == static_cast<size_t>(cfg.plan_steps() + 1));
  CHECK(curve.mse[0] == doctest::Approx(0.0).epsilon(1e-18));
  CHECK(curve.offset_seconds[1] == doctest::Approx(cfg.dt));
}

TEST_CASE("experiment runs do not depend on the thread count") {
  const auto cfg = fast_config();
  SimulationOptions opt;
  opt.kind = ExperimentKind::kPlan;
  opt.mode = AgentMode::kRandomBaseline;
  const auto serial = run_experiment(cfg, opt, 3, 1);
  const auto threaded = run_experiment(cfg, opt, 3, 3);
  CHECK(compare_runs(serial, threaded).passed);
}

TEST_CASE("median helper") {
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK_THROWS(median({}));
}

TEST_CASE("the baseline agent is a single-particle belief") {
  const auto cfg = fast_config();
  SimulationOptions opt;
  opt.kind = ExperimentKind::kPlan;
  opt.mode = AgentMode::kRandomBaseline;
  const RunResult run = simulate_run(cfg, opt, 0);
  for (const auto& b : run.belief) {
    CHECK(b.particles.size() == 1);
    CHECK(b.map_id == 0);
    CHECK(b.particles[0].weight == doctest::Approx(1.0));
  }
}

TEST_CASE("five-player scenario smoke run") {
  ScenarioConfig cfg;
  cfg.players = 5;
  cfg.circle_radius = 3.5;
  cfg.plan_duration = 10.0;
  cfg.sim_duration = 10.0;
  cfg.particles = 3;
  cfg.weights.velocity = 1.0;
  cfg.weights.reference_speed = 0.8;
  cfg.solver.convergence_tol = 1e-2;
  cfg.rng_seed = 3;
  SimulationOptions opt;
  opt.kind = ExperimentKind::kPlan;
  opt.mode = AgentMode::kMapAligned;
  opt.max_steps = 3;
  const RunResult run = simulate_run(cfg, opt, 0);
  CHECK(run.steps.size() == 4);
  CHECK(run.steps.back().x.allFinite());
  CHECK(run.player_costs.size() == 5);
  for (double c : run.player_costs) CHECK(c >= 0.0);
}

TEST_CASE("observer sharing the humans' particle predicts near-perfectly") {
  auto cfg = fast_config();
  cfg.sim_duration = 2.0;
  cfg.solver.convergence_tol = 1e-3;  // the mismatch scales with this
  SimulationOptions opt;
  opt.kind = ExperimentKind::kPredict;
  opt.mode = AgentMode::kRandomBaseline;  // one particle ...
  opt.ground_truth_particle = 0;          // ... which drives the humans too
  const RunResult run = simulate_run(cfg, opt, 0);
  const ErrorCurve curve = aggregate_prediction_error(cfg, {run});
  for (double v : curve.mse) CHECK(v < 1e-4);
}
