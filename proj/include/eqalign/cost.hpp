#pragma once

#include "eqalign/types.hpp"

#include <vector>

namespace eqalign {

// Weights of the navigation objective. All weights are nonnegative and the
// control weight is strictly positive (the backward recursion needs
// invertible control-cost blocks).
struct CostWeights {
  double terminal = 10.0;
  Eigen::Vector2d control{1.0, 1.0};  // diagonal of the control penalty
  double velocity = 0.1;
  double reference_speed = 0.0;
  double proximity = 50.0;
  double proximity_threshold = 0.75;  // m
};

// Local quadratic model of one player's cost at one stage, in deviation
// coordinates about the nominal:
//   dg ~= l'dx + 1/2 dx'Q dx + r'du_i + sum_j 1/2 du_j' R[j] du_j.
// After regularization Q is positive semidefinite and R[own] positive
// definite.
struct StageQuadratics {
  Mat Q;
  Vec l;
  std::vector<Mat> R;  // per player; cross blocks are supported but zero here
  Vec r;               // own-control gradient
};

struct TerminalQuadratics {
  Mat Q;
  Vec l;
};

// Full quadratic approximation of one player's cost along a trajectory.
struct QuadraticCostApprox {
  std::vector<StageQuadratics> stages;  // one per control step
  TerminalQuadratics terminal;
};

// One player's objective: reach a goal state by the end of the horizon, keep
// control effort and speed low, and stay clear of the other players. The
// proximity penalty is shared symmetrically by both members of a pair.
class PlayerCost {
 public:
  PlayerCost(int player, int num_players, CostWeights weights, Vec goal_state);

  int player() const { return player_; }
  int num_players() const { return num_players_; }
  const CostWeights& weights() const { return weights_; }
  const Vec& goal_state() const { return goal_; }

  // Running cost at one step: control effort + velocity + pairwise proximity.
  // At the terminal step index (step == horizon) the goal quadratic is added
  // on top; there is no control there, so pass zeros.
  double running_cost(int step, int horizon, const Vec& x, const Vec& u) const;

  double terminal_cost(const Vec& x) const;

  // dt-weighted sum of running costs plus the terminal cost.
  double total_cost(const Trajectory& traj, double dt) const;

  // Second-order expansion about one nominal stage. Running weights are
  // dt-scaled so stage sums approximate the integral; `control_reg` is added
  // to the own-control Hessian. Q is projected onto the PSD cone whenever the
  // proximity penalty is active (its Hessian is indefinite near the kink).
  StageQuadratics quadraticize_stage(const Vec& x, const Vec& u, double dt,
                                     double control_reg) const;

  TerminalQuadratics quadraticize_terminal(const Vec& x) const;

  QuadraticCostApprox quadraticize(const Trajectory& nominal, double dt,
                                   double control_reg) const;

 private:
  int player_;
  int num_players_;
  CostWeights weights_;
  Vec goal_;  // [px, py, theta, v]
};

}  // namespace eqalign
