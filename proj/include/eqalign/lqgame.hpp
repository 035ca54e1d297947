#pragma once

#include "eqalign/cost.hpp"
#include "eqalign/dynamics.hpp"
#include "eqalign/types.hpp"

#include <vector>

namespace eqalign {

// Time-varying affine feedback law for one player:
//   u_i(t, x) = feedforwards[t] - gains[t] * x.
// The same container is reused in deviation form by the iterative solver,
// where the law reads u = u_ref - P (x - x_ref) - eta * alpha.
struct AffineStrategy {
  std::vector<Mat> gains;         // m_i x n per step
  std::vector<Vec> feedforwards;  // m_i per step

  int horizon() const { return static_cast<int>(gains.size()); }

  Vec control(int t, const Vec& x) const {
    return feedforwards[t] - gains[t] * x;
  }

  static AffineStrategy zero(int horizon, int state_dim, int control_dim) {
    AffineStrategy s;
    s.gains.assign(horizon, Mat::Zero(control_dim, state_dim));
    s.feedforwards.assign(horizon, Vec::Zero(control_dim));
    return s;
  }

  bool all_finite() const {
    for (const auto& g : gains)
      if (!g.allFinite()) return false;
    for (const auto& f : feedforwards)
      if (!f.allFinite()) return false;
    return true;
  }
};

// One step of the LQ approximation: discretized dynamics Jacobians plus each
// player's quadratic cost blocks at that step.
struct LqGameStage {
  LinearizedDynamics dynamics;
  std::vector<StageQuadratics> costs;  // per player
};

struct LqSolveDiagnostics {
  // Largest relative asymmetry of any value matrix before symmetrization.
  double max_value_asymmetry = 0.0;
};

// Feedback Nash equilibrium of a finite-horizon, discrete-time, N-player
// general-sum LQ game via the coupled backward recursion: at each step the N
// first-order conditions are stacked into one block-linear system solved for
// all players' gains and feedforwards simultaneously, then each player's
// value matrices are propagated through the closed loop.
//
// Throws SolveFailure (with the step index) if a stage system is singular.
std::vector<AffineStrategy> solve_lq_game(
    const std::vector<LqGameStage>& stages,
    const std::vector<TerminalQuadratics>& terminal,
    LqSolveDiagnostics* diag = nullptr);

// Closed-loop rollout of the LQ game itself (deviation coordinates).
Trajectory lq_rollout(const std::vector<LqGameStage>& stages,
                      const std::vector<AffineStrategy>& profile,
                      const Vec& x0);

// Player cost of a linear rollout under the stage quadratics.
double lq_player_cost(const std::vector<LqGameStage>& stages,
                      const std::vector<TerminalQuadratics>& terminal,
                      const Trajectory& traj, int player);

struct LqNashReport {
  bool passed = true;
  // Most negative perturbed-minus-baseline cost change seen per player; a
  // large negative entry means that player had an improving deviation.
  std::vector<double> min_cost_delta;
  int worst_player = -1;
};

// Numerical check of the equilibrium conditions: perturb one player's
// strategy at a time, roll out on the linear dynamics, and look for cost
// improvements beyond `tol`.
LqNashReport verify_lq_nash(const std::vector<LqGameStage>& stages,
                            const std::vector<TerminalQuadratics>& terminal,
                            const std::vector<AffineStrategy>& profile,
                            int trials, double scale,
                            uint64_t rng_seed = 0x5eed, double tol = 1e-6);

}  // namespace eqalign
