#pragma once

#include "eqalign/cost.hpp"
#include "eqalign/ilq_solver.hpp"
#include "eqalign/inference.hpp"
#include "eqalign/types.hpp"

#include <string>

namespace eqalign {

// Everything needed to reproduce an experiment: geometry, weights, horizons,
// filter parameters, solver settings, and the master seed. The standard
// geometry places the players on a circle facing its center with antipodal
// goals, so all straight-line paths cross in the middle.
struct ScenarioConfig {
  int players = 3;
  double circle_radius = 3.0;
  double initial_speed = 0.0;  // m/s, along the heading toward the center
  double dt = 0.1;
  double sim_duration = 10.0;   // seconds simulated closed loop
  double plan_duration = 10.0;  // receding game horizon
  int particles = 50;
  double epsilon_obs = 0.1;
  double merge_tol = 0.25;
  double human_noise_std = 0.0;
  int robot_index = 0;
  uint64_t rng_seed = 1;

  SeedDistribution seeds;
  CostWeights weights;
  SolverSettings solver;

  // Start positions on the circle, degrees; empty means equal spacing
  // starting at zero. Each player faces the center with an antipodal goal.
  std::vector<double> spawn_angles_deg;

  int cluster_k = 0;  // 0: choose by elbow criterion
  int cluster_k_max = 12;
  double cluster_elbow_threshold = 0.04;

  int sim_steps() const;
  int plan_steps() const;

  void validate() const;

  static ScenarioConfig parse(const std::string& text);
  static ScenarioConfig load(const std::string& path);
  std::string serialize() const;
};

GameDefinition make_game(const ScenarioConfig& config);
Vec initial_joint_state(const ScenarioConfig& config);

// Start angle of one player on the circle, radians.
double spawn_angle(const ScenarioConfig& config, int player);

}  // namespace eqalign
