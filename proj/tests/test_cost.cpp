#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "eqalign/cost.hpp"
#include "eqalign/dynamics.hpp"
#include "oracles.hpp"

using namespace eqalign;

namespace {

CostWeights default_weights() { return CostWeights{}; }

PlayerCost two_player_cost(int player, CostWeights w = default_weights()) {
  Vec goal(4);
  goal << -3.0, 0.0, M_PI, 0.0;
  if (player == 1) goal << 3.0, 0.0, 0.0, 0.0;
  return PlayerCost(player, 2, w, goal);
}

// Random state with all pairwise distances kept away from the proximity kink.
Vec state_off_kink(Rng& rng, int players, double threshold) {
  for (;;) {
    Vec x(4 * players);
    for (int i = 0; i < players; ++i) {
      x[4 * i + 0] = rng.uniform(-2.0, 2.0);
      x[4 * i + 1] = rng.uniform(-2.0, 2.0);
      x[4 * i + 2] = rng.uniform(-3.0, 3.0);
      x[4 * i + 3] = rng.uniform(-1.5, 1.5);
    }
    bool ok = true;
    for (int i = 0; i < players && ok; ++i) {
      for (int j = i + 1; j < players; ++j) {
        const double d = (x.segment<2>(4 * i) - x.segment<2>(4 * j)).norm();
        if (std::abs(d - threshold) < 1e-3 || d < 1e-2) {
          ok = false;
          break;
        }
      }
    }
    if (ok) return x;
  }
}

}  // namespace

TEST_CASE("running cost vanishes when every term is inactive") {
  const PlayerCost cost = two_player_cost(0);
  Vec x = Vec::Zero(8);
  x[0] = -2.0;
  x[4] = 2.0;  // distance 4 > threshold
  const Vec u = Vec::Zero(4);
  CHECK(cost.running_cost(0, 100, x, u) == 0.0);
}

TEST_CASE("coincident players pay the full proximity penalty") {
  const PlayerCost cost = two_player_cost(0);
  const Vec x = Vec::Zero(8);  // both at origin
  const Vec u = Vec::Zero(4);
  const double d = cost.weights().proximity_threshold;
  CHECK(cost.running_cost(0, 100, x, u) ==
        doctest::Approx(cost.weights().proximity * d * d));
}

TEST_CASE("proximity penalty is symmetric across the pair") {
  const PlayerCost c0 = two_player_cost(0);
  const PlayerCost c1 = two_player_cost(1);
  Vec x = Vec::Zero(8);
  x[0] = 0.1;
  x[4] = -0.2;
  x[5] = 0.3;
  const Vec u = Vec::Zero(4);
  CHECK(c0.running_cost(0, 100, x, u) ==
        doctest::Approx(c1.running_cost(0, 100, x, u)));
}

TEST_CASE("terminal step folds the goal quadratic into the running cost") {
  const PlayerCost cost = two_player_cost(0);
  Vec x = Vec::Zero(8);
  x[0] = -2.0;
  x[4] = 2.0;
  const Vec u = Vec::Zero(4);
  const double plain = cost.running_cost(5, 100, x, u);
  const double at_terminal = cost.running_cost(100, 100, x, u);
  CHECK(at_terminal == doctest::Approx(plain + cost.terminal_cost(x)));
}

TEST_CASE("stationary player at its goal accrues zero total cost") {
  Vec goal(4);
  goal << 1.0, 2.0, 0.5, 0.0;
  const PlayerCost cost(0, 2, default_weights(), goal);
  Trajectory traj;
  Vec x(8);
  x << 1.0, 2.0, 0.5, 0.0, 10.0, 10.0, 0.0, 0.0;  // far neighbor
  for (int k = 0; k <= 3; ++k) traj.states.push_back(x);
  for (int k = 0; k < 3; ++k) traj.controls.push_back(Vec::Zero(4));
  CHECK(cost.total_cost(traj, 0.1) == 0.0);
}

TEST_CASE("total cost scales linearly with the weights") {
  Rng rng(3);
  Trajectory traj;
  UnicycleDynamics dyn(2);
  traj.states.push_back(state_off_kink(rng, 2, 0.75));
  for (int k = 0; k < 4; ++k) {
    Vec u(4);
    for (int i = 0; i < 4; ++i) u[i] = rng.uniform(-1.0, 1.0);
    traj.controls.push_back(u);
    traj.states.push_back(dyn.integrate(k, traj.states.back(), u, 0.1));
  }

  CostWeights w = default_weights();
  const PlayerCost base = two_player_cost(0, w);
  const double c = 3.5;
  CostWeights scaled = w;
  scaled.terminal *= c;
  scaled.control *= c;
  scaled.velocity *= c;
  scaled.proximity *= c;
  const PlayerCost scaled_cost = two_player_cost(0, scaled);
  CHECK(scaled_cost.total_cost(traj, 0.1) ==
        doctest::Approx(c * base.total_cost(traj, 0.1)));
}

TEST_CASE("hand-computed two-step trajectory total cost") {
  CostWeights w;
  w.terminal = 2.0;
  w.control = Eigen::Vector2d(1.0, 0.5);
  w.velocity = 0.3;
  w.proximity = 4.0;
  w.proximity_threshold = 1.0;
  Vec goal(4);
  goal << 1.0, 0.0, 0.0, 0.0;
  const PlayerCost cost(0, 2, w, goal);

  Trajectory traj;
  Vec x0(8), x1(8), x2(8);
  x0 << 0.0, 0.0, 0.0, 1.0, 0.5, 0.0, 0.0, 0.0;   // d=0.5 -> gap 0.5
  x1 << 0.2, 0.0, 0.0, 1.0, 2.0, 0.0, 0.0, 0.0;   // d=1.8 -> inactive
  x2 << 0.5, 0.0, 0.1, 0.8, 2.0, 0.0, 0.0, 0.0;
  Vec u0(4), u1(4);
  u0 << 1.0, -1.0, 0.0, 0.0;
  u1 << 0.0, 2.0, 0.0, 0.0;
  traj.states = {x0, x1, x2};
  traj.controls = {u0, u1};
  const double dt = 0.5;

  // step 0: control 1*1 + 0.5*1 = 1.5; velocity 0.3*1 = 0.3;
  //         proximity 4*(0.5)^2 = 1.0  -> 2.8
  // step 1: control 0.5*4 = 2.0; velocity 0.3 -> 2.3
  // terminal: 2 * (0.5^2 + 0 + 0.1^2 + 0.8^2) = 2 * 0.9 = 1.8
  const double expected = dt * (2.8 + 2.3) + 2.0 * (0.25 + 0.01 + 0.64);
  CHECK(cost.total_cost(traj, dt) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("pure control quadraticization is exact") {
  const PlayerCost cost = two_player_cost(0);
  Vec x = Vec::Zero(8);
  x[0] = -3.0;
  x[4] = 3.0;
  Vec u(4);
  u << 0.7, -0.2, 0.1, 0.4;
  // dt = 1 and no regularization to read the blocks directly.
  const StageQuadratics q = cost.quadraticize_stage(x, u, 1.0, 0.0);
  CHECK(q.R[0](0, 0) == doctest::Approx(2.0 * cost.weights().control[0]));
  CHECK(q.R[0](1, 1) == doctest::Approx(2.0 * cost.weights().control[1]));
  CHECK(q.r[0] == doctest::Approx(2.0 * cost.weights().control[0] * 0.7));
  CHECK(q.r[1] == doctest::Approx(2.0 * cost.weights().control[1] * -0.2));
  CHECK(q.R[1].cwiseAbs().maxCoeff() == 0.0);  // cross blocks stay zero
}

TEST_CASE("inactive proximity leaves position blocks empty") {
  const PlayerCost cost = two_player_cost(0);
  Vec x = Vec::Zero(8);
  x[0] = -3.0;
  x[4] = 3.0;
  const StageQuadratics q =
      cost.quadraticize_stage(x, Vec::Zero(4), 1.0, 0.0);
  CHECK(q.Q.block<2, 2>(0, 0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(q.l.segment<2>(0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("quadratic-only cost model is exact at any deviation") {
  CostWeights w = default_weights();
  w.proximity = 0.0;  // quadratic-only
  const PlayerCost cost = two_player_cost(0, w);
  Rng rng(9);
  const Vec x = state_off_kink(rng, 2, w.proximity_threshold);
  Vec u(4);
  for (int i = 0; i < 4; ++i) u[i] = rng.uniform(-1.0, 1.0);
  const double dt = 0.1;
  const StageQuadratics q = cost.quadraticize_stage(x, u, dt, 0.0);
  const double base = dt * cost.running_cost(0, 100, x, u);

  for (int trial = 0; trial < 20; ++trial) {
    Vec dx(8), du(4);
    for (int i = 0; i < 8; ++i) dx[i] = rng.uniform(-0.5, 0.5);
    for (int i = 0; i < 4; ++i) du[i] = rng.uniform(-0.5, 0.5);
    const double exact = dt * cost.running_cost(0, 100, x + dx, u + du);
    double model = base + q.l.dot(dx) + 0.5 * dx.dot(q.Q * dx) +
                   q.r.dot(du.segment<2>(0));
    for (int j = 0; j < 2; ++j) {
      const Vec duj = du.segment<2>(2 * j);
      model += 0.5 * duj.dot(q.R[j] * duj);
    }
    CHECK(std::abs(exact - model) < 1e-12 * std::max(1.0, std::abs(exact)));
  }
}

TEST_CASE("gradients and Hessians match finite differences off the kink") {
  const CostWeights w = default_weights();
  const PlayerCost cost(0, 3, w, []() {
    Vec g(4);
    g << -1.0, 0.5, 0.0, 0.0;
    return g;
  }());
  Rng rng(31);
  int active_samples = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Vec x = state_off_kink(rng, 3, w.proximity_threshold);
    Vec u(6);
    for (int i = 0; i < 6; ++i) u[i] = rng.uniform(-1.5, 1.5);

    bool active = false;
    for (int j = 1; j < 3; ++j) {
      if ((x.segment<2>(0) - x.segment<2>(4 * j)).norm() <
          w.proximity_threshold) {
        active = true;
      }
    }
    if (active) ++active_samples;

    const StageQuadratics q = cost.quadraticize_stage(x, u, 1.0, 0.0);
    const auto f_of_x = [&](const Vec& xx) {
      return cost.running_cost(0, 100, xx, u);
    };
    const Vec l_fd = oracles::fd_gradient(f_of_x, x);
    const double scale = std::max(1.0, l_fd.cwiseAbs().maxCoeff());
    CHECK((q.l - l_fd).cwiseAbs().maxCoeff() / scale < 1e-5);

    const Vec r_fd = oracles::fd_gradient(
        [&](const Vec& uu) { return cost.running_cost(0, 100, x, uu); }, u);
    CHECK((q.r - r_fd.segment<2>(0)).cwiseAbs().maxCoeff() /
              std::max(1.0, r_fd.cwiseAbs().maxCoeff()) <
          1e-5);

    // The terminal expansion is exact; spot-check against finite differences.
    const TerminalQuadratics t = cost.quadraticize_terminal(x);
    const Vec lt_fd = oracles::fd_gradient(
        [&](const Vec& xx) { return cost.terminal_cost(xx); }, x);
    CHECK((t.l - lt_fd).cwiseAbs().maxCoeff() /
              std::max(1.0, lt_fd.cwiseAbs().maxCoeff()) <
          1e-5);
  }
  // Off-kink sampling must still exercise the active branch.
  CHECK(active_samples > 5);
}

TEST_CASE("proximity Hessian matches finite differences before projection") {
  // On the active smooth branch, compare the unprojected pair Hessian via a
  // proximity-only cost whose Q is a pure saddle before clamping; use the
  // gradient (exact) and the FD Hessian restricted to the PSD projection.
  CostWeights w = default_weights();
  w.velocity = 0.0;
  const PlayerCost cost = two_player_cost(0, w);
  Vec x = Vec::Zero(8);
  x[0] = 0.2;
  x[1] = 0.1;
  x[4] = -0.2;
  x[5] = -0.15;
  const auto f = [&](const Vec& xx) {
    return cost.running_cost(0, 100, xx, Vec::Zero(4));
  };
  const Mat H_fd = oracles::fd_hessian(f, x);
  Eigen::SelfAdjointEigenSolver<Mat> eig(H_fd);
  const Mat H_proj = eig.eigenvectors() *
                     eig.eigenvalues().cwiseMax(0.0).asDiagonal() *
                     eig.eigenvectors().transpose();
  const StageQuadratics q = cost.quadraticize_stage(x, Vec::Zero(4), 1.0, 0.0);
  CHECK((q.Q - H_proj).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("quadraticized state blocks are PSD and own-control blocks PD") {
  const PlayerCost cost = two_player_cost(0);
  Vec x = Vec::Zero(8);
  x[4] = 0.3;  // active proximity
  const StageQuadratics q =
      cost.quadraticize_stage(x, Vec::Zero(4), 0.1, 1e-6);
  Eigen::SelfAdjointEigenSolver<Mat> eig(q.Q);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-12);
  Eigen::SelfAdjointEigenSolver<Mat> eig_r(q.R[0]);
  CHECK(eig_r.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("total cost is nonnegative on random trajectories") {
  Rng rng(101);
  UnicycleDynamics dyn(2);
  const PlayerCost cost = two_player_cost(0);
  for (int trial = 0; trial < 20; ++trial) {
    Trajectory traj;
    traj.states.push_back(state_off_kink(rng, 2, 0.75));
    for (int k = 0; k < 10; ++k) {
      Vec u(4);
      for (int i = 0; i < 4; ++i) u[i] = rng.uniform(-2.0, 2.0);
      traj.controls.push_back(u);
      traj.states.push_back(dyn.integrate(k, traj.states.back(), u, 0.1));
    }
    CHECK(cost.total_cost(traj, 0.1) >= 0.0);
  }
}

TEST_CASE("invalid weights are rejected") {
  Vec goal = Vec::Zero(4);
  CostWeights w;
  w.control = Eigen::Vector2d(0.0, 1.0);
  CHECK_THROWS(PlayerCost(0, 2, w, goal));
  w = CostWeights{};
  w.proximity_threshold = 0.0;
  CHECK_THROWS(PlayerCost(0, 2, w, goal));
  w = CostWeights{};
  w.terminal = -1.0;
  CHECK_THROWS(PlayerCost(0, 2, w, goal));
}

TEST_CASE("whole-trajectory quadraticization lines up with per-stage calls") {
  const PlayerCost cost = two_player_cost(0);
  Rng rng(77);
  UnicycleDynamics dyn(2);
  Trajectory traj;
  traj.states.push_back(state_off_kink(rng, 2, 0.75));
  for (int k = 0; k < 6; ++k) {
    Vec u(4);
    for (int i = 0; i < 4; ++i) u[i] = rng.uniform(-1.0, 1.0);
    traj.controls.push_back(u);
    traj.states.push_back(dyn.integrate(k, traj.states.back(), u, 0.1));
  }
  const QuadraticCostApprox approx = cost.quadraticize(traj, 0.1, 1e-6);
  REQUIRE(approx.stages.size() == 6);
  for (int k = 0; k < 6; ++k) {
    const StageQuadratics direct =
        cost.quadraticize_stage(traj.states[k], traj.controls[k], 0.1, 1e-6);
    CHECK((approx.stages[k].Q - direct.Q).cwiseAbs().maxCoeff() == 0.0);
    CHECK((approx.stages[k].l - direct.l).cwiseAbs().maxCoeff() == 0.0);
  }
  const TerminalQuadratics term = cost.quadraticize_terminal(traj.states[6]);
  CHECK((approx.terminal.Q - term.Q).cwiseAbs().maxCoeff() == 0.0);
  CHECK((approx.terminal.l - term.l).cwiseAbs().maxCoeff() == 0.0);
}
