#pragma once

#include "eqalign/cost.hpp"
#include "eqalign/dynamics.hpp"
#include "eqalign/lqgame.hpp"
#include "eqalign/types.hpp"

#include <memory>
#include <vector>

namespace eqalign {

// Joint dynamics, per-player costs, and the planning horizon.
struct GameDefinition {
  std::shared_ptr<const DynamicalSystem> dynamics;
  std::vector<PlayerCost> costs;
  int horizon_steps = 0;
  double dt = 0.1;

  int num_players() const { return static_cast<int>(costs.size()); }
};

struct SolverSettings {
  int max_iterations = 100;
  // Max elementwise state-trajectory change between iterations (m or rad).
  double convergence_tol = 1e-2;
  double step_size = 0.5;  // eta
  double backtracking_shrink = 0.5;
  int max_backtracks = 8;
  double regularization = 1e-6;  // added to own-control Hessians
  int max_regularization_attempts = 3;
  double divergence_limit = 1e6;
};

struct SolveResult {
  // Offset form, re-centered on `trajectory`: u_i(t,x) = alpha_i(t) - P_i(t) x.
  std::vector<AffineStrategy> strategies;
  Trajectory trajectory;  // closed-loop rollout of `strategies` from x0
  bool converged = false;
  int iterations = 0;
  std::vector<double> player_costs;
};

// Forward integration with each control in deviation form about a reference:
//   u_i(t) = u_ref_i(t) - P_i(t) (x(t) - x_ref(t)) - eta * alpha_i(t).
// Throws DivergenceError if the state leaves the divergence guard.
Trajectory rollout(const GameDefinition& game, const Vec& x0,
                   const std::vector<AffineStrategy>& strategies,
                   const Trajectory& reference, double eta,
                   double divergence_limit = 1e6);

// Forward integration of offset-form strategies: u_i(t) = alpha_i(t) - P_i x.
Trajectory rollout(const GameDefinition& game, const Vec& x0,
                   const std::vector<AffineStrategy>& strategies,
                   double divergence_limit = 1e6);

std::vector<double> player_costs(const GameDefinition& game,
                                 const Trajectory& traj);

// LQ approximation of the game about a nominal trajectory.
struct LqApproximation {
  std::vector<LqGameStage> stages;
  std::vector<TerminalQuadratics> terminal;
};
LqApproximation build_lq_approximation(const GameDefinition& game,
                                       const Trajectory& nominal,
                                       double control_reg);

// Iterative LQ game solver. Repeats simulate / approximate / update with a
// backtracked interpolation step until the trajectory stops changing, then
// returns the strategies re-centered on the final trajectory. Deterministic:
// the same warm start always reaches the same equilibrium, which is what lets
// a set of initial strategies stand in for the equilibrium itself.
SolveResult ilq_solve(const GameDefinition& game, const Vec& x0,
                      const std::vector<AffineStrategy>& warm_start,
                      const SolverSettings& settings = {});

struct NashReport {
  bool passed = true;
  // Largest relative cost improvement any player achieved by a unilateral
  // strategy perturbation; negative values mean every deviation hurt.
  double worst_improvement = 0.0;
  int worst_player = -1;
  int improving_trials = 0;
};

// Perturbs one player's strategy at a time, rolls out on the true nonlinear
// dynamics, and reports whether any player could improve their total cost by
// more than `tol_rel` (relative).
NashReport verify_local_nash(const GameDefinition& game,
                             const SolveResult& result, int trials,
                             double scale, double tol_rel = 1e-3,
                             uint64_t rng_seed = 0x5eed);

}  // namespace eqalign
