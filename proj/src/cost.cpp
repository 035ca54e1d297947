#include "eqalign/cost.hpp"

#include <cmath>

namespace eqalign {

namespace {

// Distance below which a pair is treated as coincident. The gradient of the
// proximity term is undefined there; limits are substituted.
constexpr double kCoincident = 1e-9;

}  // namespace

PlayerCost::PlayerCost(int player, int num_players, CostWeights weights,
                       Vec goal_state)
    : player_(player),
      num_players_(num_players),
      weights_(weights),
      goal_(std::move(goal_state)) {
  if (player < 0 || player >= num_players) {
    throw std::invalid_argument("player index out of range");
  }
  if (goal_.size() != 4) throw DimensionError("goal state must be a 4-vector");
  if (weights_.control.minCoeff() <= 0.0) {
    throw std::invalid_argument("control weight must be positive definite");
  }
  if (weights_.proximity_threshold <= 0.0) {
    throw std::invalid_argument("proximity threshold must be positive");
  }
  if (weights_.terminal < 0.0 || weights_.velocity < 0.0 ||
      weights_.proximity < 0.0) {
    throw std::invalid_argument("weights must be nonnegative");
  }
}

double PlayerCost::running_cost(int step, int horizon, const Vec& x,
                                const Vec& u) const {
  if (x.size() != 4 * num_players_ || u.size() != 2 * num_players_) {
    throw DimensionError("running_cost: dimension mismatch");
  }
  const Eigen::Vector2d ui = u.segment<2>(2 * player_);
  double cost = ui.cwiseProduct(weights_.control).dot(ui);

  const double dv = x[4 * player_ + 3] - weights_.reference_speed;
  cost += weights_.velocity * dv * dv;

  const Eigen::Vector2d pi = x.segment<2>(4 * player_);
  for (int j = 0; j < num_players_; ++j) {
    if (j == player_) continue;
    const double d = (pi - x.segment<2>(4 * j)).norm();
    const double gap = weights_.proximity_threshold - d;
    if (gap > 0.0) cost += weights_.proximity * gap * gap;
  }

  if (step == horizon) cost += terminal_cost(x);
  return cost;
}

double PlayerCost::terminal_cost(const Vec& x) const {
  const Vec err = x.segment<4>(4 * player_) - goal_;
  return weights_.terminal * err.squaredNorm();
}

double PlayerCost::total_cost(const Trajectory& traj, double dt) const {
  double total = 0.0;
  const int T = traj.horizon();
  for (int k = 0; k < T; ++k) {
    total += dt * running_cost(k, T, traj.states[k], traj.controls[k]);
  }
  return total + terminal_cost(traj.states[T]);
}

StageQuadratics PlayerCost::quadraticize_stage(const Vec& x, const Vec& u,
                                               double dt,
                                               double control_reg) const {
  const int n = 4 * num_players_;
  StageQuadratics q;
  q.Q = Mat::Zero(n, n);
  q.l = Vec::Zero(n);
  q.R.reserve(num_players_);
  for (int j = 0; j < num_players_; ++j) q.R.push_back(Mat::Zero(2, 2));
  q.r = Vec::Zero(2);

  // Control effort: exact quadratic.
  const Eigen::Vector2d ui = u.segment<2>(2 * player_);
  q.R[player_] = 2.0 * dt * weights_.control.asDiagonal();
  q.R[player_] += control_reg * Mat::Identity(2, 2);
  q.r = 2.0 * dt * weights_.control.cwiseProduct(ui);

  // Velocity preference: exact quadratic in the own v slot.
  const int vi = 4 * player_ + 3;
  q.Q(vi, vi) = 2.0 * dt * weights_.velocity;
  q.l[vi] = 2.0 * dt * weights_.velocity *
            (x[vi] - weights_.reference_speed);

  // Pairwise proximity: smooth branches of the semi-quadratic penalty.
  bool proximity_active = false;
  const Eigen::Vector2d pi = x.segment<2>(4 * player_);
  for (int j = 0; j < num_players_; ++j) {
    if (j == player_) continue;
    const Eigen::Vector2d dp = pi - x.segment<2>(4 * j);
    const double d = dp.norm();
    const double gap = weights_.proximity_threshold - d;
    if (gap <= 0.0) continue;
    proximity_active = true;

    const double w = dt * weights_.proximity;
    Eigen::Vector2d grad;
    Eigen::Matrix2d hess;
    if (d < kCoincident) {
      grad.setZero();
      hess = 2.0 * w * Eigen::Matrix2d::Identity();
    } else {
      const Eigen::Vector2d dir = dp / d;
      grad = -2.0 * w * gap * dir;
      const Eigen::Matrix2d outer = dir * dir.transpose();
      hess = 2.0 * w * outer -
             (2.0 * w * gap / d) * (Eigen::Matrix2d::Identity() - outer);
    }

    const int bi = 4 * player_;
    const int bj = 4 * j;
    q.l.segment<2>(bi) += grad;
    q.l.segment<2>(bj) -= grad;
    q.Q.block<2, 2>(bi, bi) += hess;
    q.Q.block<2, 2>(bj, bj) += hess;
    q.Q.block<2, 2>(bi, bj) -= hess;
    q.Q.block<2, 2>(bj, bi) -= hess;
  }

  if (proximity_active) {
    // The proximity Hessian is indefinite; clamp eigenvalues at zero so the
    // Riccati recursion sees a PSD state block.
    Eigen::SelfAdjointEigenSolver<Mat> eig(q.Q);
    const Vec clamped = eig.eigenvalues().cwiseMax(0.0);
    q.Q = eig.eigenvectors() * clamped.asDiagonal() *
          eig.eigenvectors().transpose();
    q.Q = 0.5 * (q.Q + q.Q.transpose()).eval();
  }
  return q;
}

TerminalQuadratics PlayerCost::quadraticize_terminal(const Vec& x) const {
  const int n = 4 * num_players_;
  TerminalQuadratics t;
  t.Q = Mat::Zero(n, n);
  t.l = Vec::Zero(n);
  const int b = 4 * player_;
  t.Q.block<4, 4>(b, b) = 2.0 * weights_.terminal * Mat::Identity(4, 4);
  t.l.segment<4>(b) = 2.0 * weights_.terminal * (x.segment<4>(b) - goal_);
  return t;
}

QuadraticCostApprox PlayerCost::quadraticize(const Trajectory& nominal,
                                             double dt,
                                             double control_reg) const {
  QuadraticCostApprox approx;
  const int T = nominal.horizon();
  approx.stages.reserve(T);
  for (int k = 0; k < T; ++k) {
    approx.stages.push_back(quadraticize_stage(nominal.states[k],
                                               nominal.controls[k], dt,
                                               control_reg));
  }
  approx.terminal = quadraticize_terminal(nominal.states[T]);
  return approx;
}

}  // namespace eqalign
