#include "eqalign/scenario.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace eqalign {

namespace {

constexpr double kPi = 3.14159265358979323846;

int duration_to_steps(double duration, double dt, const char* what) {
  const double steps = duration / dt;
  const double rounded = std::round(steps);
  if (std::abs(steps - rounded) > 1e-9 * std::max(1.0, steps)) {
    throw std::invalid_argument(std::string(what) +
                                " must be an integer multiple of dt");
  }
  return static_cast<int>(rounded);
}

}  // namespace

int ScenarioConfig::sim_steps() const {
  return duration_to_steps(sim_duration, dt, "sim_duration");
}

int ScenarioConfig::plan_steps() const {
  return duration_to_steps(plan_duration, dt, "plan_duration");
}

void ScenarioConfig::validate() const {
  if (players < 2) throw std::invalid_argument("players must be >= 2");
  if (dt <= 0.0) throw std::invalid_argument("dt must be positive");
  if (particles < 1) throw std::invalid_argument("particles must be >= 1");
  if (epsilon_obs <= 0.0) {
    throw std::invalid_argument("epsilon_obs must be positive");
  }
  if (robot_index < 0 || robot_index >= players) {
    throw std::invalid_argument("robot_index out of range");
  }
  if (!spawn_angles_deg.empty() &&
      static_cast<int>(spawn_angles_deg.size()) != players) {
    throw std::invalid_argument("spawn_angles_deg needs one angle per player");
  }
  sim_steps();
  plan_steps();
}

ScenarioConfig ScenarioConfig::parse(const std::string& text) {
  ScenarioConfig cfg;
  std::map<std::string, std::function<void(const std::string&)>> setters;

  auto set_double = [](double& field) {
    return [&field](const std::string& v) { field = std::stod(v); };
  };
  auto set_int = [](int& field) {
    return [&field](const std::string& v) { field = std::stoi(v); };
  };

  setters["players"] = set_int(cfg.players);
  setters["circle_radius"] = set_double(cfg.circle_radius);
  setters["initial_speed"] = set_double(cfg.initial_speed);
  setters["dt"] = set_double(cfg.dt);
  setters["sim_duration"] = set_double(cfg.sim_duration);
  setters["plan_duration"] = set_double(cfg.plan_duration);
  setters["particles"] = set_int(cfg.particles);
  setters["epsilon_obs"] = set_double(cfg.epsilon_obs);
  setters["merge_tol"] = set_double(cfg.merge_tol);
  setters["human_noise_std"] = set_double(cfg.human_noise_std);
  setters["robot_index"] = set_int(cfg.robot_index);
  setters["rng_seed"] = [&cfg](const std::string& v) {
    cfg.rng_seed = std::stoull(v);
  };
  setters["seed_turn_rate_min"] = set_double(cfg.seeds.turn_rate_min);
  setters["seed_turn_rate_max"] = set_double(cfg.seeds.turn_rate_max);
  setters["seed_accel_min"] = set_double(cfg.seeds.accel_min);
  setters["seed_accel_max"] = set_double(cfg.seeds.accel_max);
  setters["weight_terminal"] = set_double(cfg.weights.terminal);
  setters["weight_control_turn"] = [&cfg](const std::string& v) {
    cfg.weights.control[0] = std::stod(v);
  };
  setters["weight_control_accel"] = [&cfg](const std::string& v) {
    cfg.weights.control[1] = std::stod(v);
  };
  setters["weight_velocity"] = set_double(cfg.weights.velocity);
  setters["reference_speed"] = set_double(cfg.weights.reference_speed);
  setters["weight_proximity"] = set_double(cfg.weights.proximity);
  setters["proximity_threshold"] = set_double(cfg.weights.proximity_threshold);
  setters["solver_max_iterations"] = set_int(cfg.solver.max_iterations);
  setters["solver_convergence_tol"] = set_double(cfg.solver.convergence_tol);
  setters["solver_step_size"] = set_double(cfg.solver.step_size);
  setters["solver_backtracking_shrink"] =
      set_double(cfg.solver.backtracking_shrink);
  setters["solver_max_backtracks"] = set_int(cfg.solver.max_backtracks);
  setters["solver_regularization"] = set_double(cfg.solver.regularization);
  setters["cluster_k"] = set_int(cfg.cluster_k);
  setters["cluster_k_max"] = set_int(cfg.cluster_k_max);
  setters["cluster_elbow_threshold"] = set_double(cfg.cluster_elbow_threshold);
  setters["spawn_angles_deg"] = [&cfg](const std::string& v) {
    cfg.spawn_angles_deg.clear();
    std::istringstream ss(v);
    std::string part;
    while (std::getline(ss, part, ',')) {
      cfg.spawn_angles_deg.push_back(std::stod(part));
    }
  };

  std::istringstream in(text);
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos) {
        throw std::invalid_argument("config line " + std::to_string(line_number) +
                                    ": expected key = value");
      }
      continue;
    }
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) {
      throw std::invalid_argument("config line " + std::to_string(line_number) +
                                  ": unknown key '" + key + "'");
    }
    try {
      it->second(value);
    } catch (const std::exception&) {
      throw std::invalid_argument("config line " + std::to_string(line_number) +
                                  ": bad value for '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig ScenarioConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string ScenarioConfig::serialize() const {
  std::ostringstream out;
  out.precision(17);
  out << "players = " << players << "\n";
  out << "circle_radius = " << circle_radius << "\n";
  out << "initial_speed = " << initial_speed << "\n";
  out << "dt = " << dt << "\n";
  out << "sim_duration = " << sim_duration << "\n";
  out << "plan_duration = " << plan_duration << "\n";
  out << "particles = " << particles << "\n";
  out << "epsilon_obs = " << epsilon_obs << "\n";
  out << "merge_tol = " << merge_tol << "\n";
  out << "human_noise_std = " << human_noise_std << "\n";
  out << "robot_index = " << robot_index << "\n";
  out << "rng_seed = " << rng_seed << "\n";
  out << "seed_turn_rate_min = " << seeds.turn_rate_min << "\n";
  out << "seed_turn_rate_max = " << seeds.turn_rate_max << "\n";
  out << "seed_accel_min = " << seeds.accel_min << "\n";
  out << "seed_accel_max = " << seeds.accel_max << "\n";
  out << "weight_terminal = " << weights.terminal << "\n";
  out << "weight_control_turn = " << weights.control[0] << "\n";
  out << "weight_control_accel = " << weights.control[1] << "\n";
  out << "weight_velocity = " << weights.velocity << "\n";
  out << "reference_speed = " << weights.reference_speed << "\n";
  out << "weight_proximity = " << weights.proximity << "\n";
  out << "proximity_threshold = " << weights.proximity_threshold << "\n";
  out << "solver_max_iterations = " << solver.max_iterations << "\n";
  out << "solver_convergence_tol = " << solver.convergence_tol << "\n";
  out << "solver_step_size = " << solver.step_size << "\n";
  out << "solver_backtracking_shrink = " << solver.backtracking_shrink << "\n";
  out << "solver_max_backtracks = " << solver.max_backtracks << "\n";
  out << "solver_regularization = " << solver.regularization << "\n";
  out << "cluster_k = " << cluster_k << "\n";
  out << "cluster_k_max = " << cluster_k_max << "\n";
  out << "cluster_elbow_threshold = " << cluster_elbow_threshold << "\n";
  if (!spawn_angles_deg.empty()) {
    out << "spawn_angles_deg = ";
    for (size_t i = 0; i < spawn_angles_deg.size(); ++i) {
      if (i > 0) out << ", ";
      out << spawn_angles_deg[i];
    }
    out << "\n";
  }
  return out.str();
}

double spawn_angle(const ScenarioConfig& config, int player) {
  if (!config.spawn_angles_deg.empty()) {
    return config.spawn_angles_deg[player] * kPi / 180.0;
  }
  return 2.0 * kPi * player / config.players;
}

GameDefinition make_game(const ScenarioConfig& config) {
  config.validate();
  GameDefinition game;
  game.dynamics = std::make_shared<UnicycleDynamics>(config.players);
  game.horizon_steps = config.plan_steps();
  game.dt = config.dt;
  game.costs.reserve(config.players);
  for (int i = 0; i < config.players; ++i) {
    const double angle = spawn_angle(config, i);
    Vec goal(4);
    // Antipodal goal, heading preserved through the crossing, at rest.
    goal << -config.circle_radius * std::cos(angle),
        -config.circle_radius * std::sin(angle), angle + kPi, 0.0;
    game.costs.emplace_back(i, config.players, config.weights, goal);
  }
  return game;
}

Vec initial_joint_state(const ScenarioConfig& config) {
  Vec x0(4 * config.players);
  for (int i = 0; i < config.players; ++i) {
    const double angle = spawn_angle(config, i);
    x0[4 * i + 0] = config.circle_radius * std::cos(angle);
    x0[4 * i + 1] = config.circle_radius * std::sin(angle);
    x0[4 * i + 2] = angle + kPi;  // facing the center
    x0[4 * i + 3] = config.initial_speed;
  }
  return x0;
}

}  // namespace eqalign
