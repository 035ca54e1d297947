#pragma once

#include "eqalign/ilq_solver.hpp"
#include "eqalign/types.hpp"

#include <unordered_map>
#include <utility>
#include <vector>

namespace eqalign {

// Open-loop half-cosine seed strategies: per player,
//   u_i(t) = [beta_w cos(t pi / T); beta_a cos(t pi / T)],
// with beta_w, beta_a drawn uniformly per player per profile. The seeds index
// equilibria implicitly: the solver is deterministic, so a seed always leads
// to the same fixed point.
struct SeedDistribution {
  double turn_rate_min = -1.5;  // rad/s
  double turn_rate_max = 1.5;
  double accel_min = -1.0;  // m/s^2
  double accel_max = 1.0;
};

std::vector<std::vector<AffineStrategy>> sample_seeds(
    const SeedDistribution& dist, const GameDefinition& game, int count,
    uint64_t rng_seed);

// One equilibrium hypothesis: a strategy profile, its latest solve, and a
// log-domain weight (-inf marks an eliminated particle).
struct Particle {
  int id = 0;
  std::vector<AffineStrategy> strategies;
  SolveResult last_result;
  double log_weight = 0.0;

  bool alive() const { return std::isfinite(log_weight); }
};

class Belief {
 public:
  std::vector<Particle> particles;

  // Shifts log weights so they sum to one in the linear domain.
  // Throws EstimatorCollapse if no particle is alive.
  void normalize();

  std::vector<double> normalized_weights() const;

  // Index of the highest-weight particle, ties broken by lowest id.
  int map_index() const;

  // Drops particles whose log weight trails the maximum by more than
  // `log_drop` (always keeps the best one).
  void prune(double log_drop = 700.0);

  // Live particle id that currently represents `original_id`, following any
  // merges that absorbed it.
  int representative_of(int original_id) const;

  void record_merge(int absorbed, int representative);

 private:
  std::unordered_map<int, int> merged_into_;
};

// Solves every seed from the initial state and forms a uniform belief.
// Seeds whose solve fails are eliminated.
Belief init_belief(const GameDefinition& game,
                   const std::vector<std::vector<AffineStrategy>>& seeds,
                   const Vec& x0, const SolverSettings& settings);

// One-step state prediction under a particle's strategy profile: every player
// follows the particle's feedback law evaluated at the true previous state;
// if `u_robot` is given it overrides the robot player's block.
Vec predict_step(const GameDefinition& game, const Particle& particle,
                 const Vec& x_prev, const Vec* u_robot, int robot_index);

// Log-density of an isotropic Gaussian with covariance epsilon * I.
double gaussian_log_likelihood(const Vec& x, const Vec& xhat, double epsilon);

// Max-over-time distance between the stacked player positions of two plans.
double trajectory_position_distance(const Trajectory& a, const Trajectory& b,
                                    int num_players);

// Greedy merge of particles whose predicted trajectories coincide within
// `merge_tol`; weights are combined in the log domain onto the
// highest-weight member of each cluster. Total weight is conserved and the
// particle count never increases. Returns (absorbed id, representative id)
// pairs for this pass.
std::vector<std::pair<int, int>> combine_duplicates(Belief& belief,
                                                    double merge_tol,
                                                    int num_players);

// Highest-posterior particle id and its strategy for the given player.
std::pair<int, const AffineStrategy*> map_strategy(const Belief& belief,
                                                   int player);

struct InferenceParams {
  double epsilon_obs = 0.1;
  double merge_tol = 0.25;  // m, on max joint-position deviation
  int robot_index = 0;
  double prune_log_drop = 700.0;
};

struct PlannerStep {
  Vec robot_control;  // empty when running as a pure observer
  int map_id = -1;
  std::vector<std::pair<int, int>> merges;
};

// Drops the first `steps` entries of every strategy so a profile solved at an
// earlier origin can warm-start the remaining-time game.
std::vector<AffineStrategy> shift_profile(
    const std::vector<AffineStrategy>& profile, int steps);

// One cycle of maximum-a-posteriori aligned control: re-solve every live
// particle from the previous state (warm-started, shifted by `warm_shift`
// steps to the game's origin), predict, reweight with the observation, merge
// duplicates, and extract the aligned control for the current step. `game`
// must carry the horizon of the remaining-time game solved from x_prev. Pass
// u_applied == nullptr to run as a pure observer with no controlled player.
PlannerStep map_planner_step(Belief& belief, const GameDefinition& game,
                             const Vec& x_t, const Vec& x_prev,
                             const Vec* u_applied, int warm_shift,
                             const SolverSettings& settings,
                             const InferenceParams& params);

}  // namespace eqalign
