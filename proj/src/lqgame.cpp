#include "eqalign/lqgame.hpp"

#include <cmath>

namespace eqalign {

std::vector<AffineStrategy> solve_lq_game(
    const std::vector<LqGameStage>& stages,
    const std::vector<TerminalQuadratics>& terminal,
    LqSolveDiagnostics* diag) {
  if (stages.empty()) throw std::invalid_argument("solve_lq_game: no stages");
  const int T = static_cast<int>(stages.size());
  const int num_players = static_cast<int>(stages[0].costs.size());
  if (static_cast<int>(terminal.size()) != num_players) {
    throw DimensionError("solve_lq_game: terminal cost count mismatch");
  }
  const int n = static_cast<int>(stages[0].dynamics.A.rows());

  std::vector<int> udim(num_players), uoff(num_players);
  int total_udim = 0;
  for (int i = 0; i < num_players; ++i) {
    udim[i] = static_cast<int>(stages[0].dynamics.B[i].cols());
    uoff[i] = total_udim;
    total_udim += udim[i];
  }

  std::vector<AffineStrategy> strategies(num_players);
  for (int i = 0; i < num_players; ++i) {
    strategies[i].gains.assign(T, Mat());
    strategies[i].feedforwards.assign(T, Vec());
  }

  // Value function of each player: V_i(x) = 1/2 x'Z_i x + zeta_i'x + const.
  std::vector<Mat> Z(num_players);
  std::vector<Vec> zeta(num_players);
  for (int i = 0; i < num_players; ++i) {
    Z[i] = terminal[i].Q;
    zeta[i] = terminal[i].l;
  }

  Mat S(total_udim, total_udim);
  Mat Y(total_udim, n + 1);

  for (int k = T - 1; k >= 0; --k) {
    const auto& lin = stages[k].dynamics;
    const auto& costs = stages[k].costs;

    // Stack the first-order conditions of all players.
    for (int i = 0; i < num_players; ++i) {
      const Mat BtZ = lin.B[i].transpose() * Z[i];  // m_i x n
      for (int j = 0; j < num_players; ++j) {
        S.block(uoff[i], uoff[j], udim[i], udim[j]).noalias() =
            BtZ * lin.B[j];
      }
      S.block(uoff[i], uoff[i], udim[i], udim[i]) += costs[i].R[i];
      Y.block(uoff[i], 0, udim[i], n).noalias() = BtZ * lin.A;
      Y.block(uoff[i], n, udim[i], 1).noalias() =
          lin.B[i].transpose() * zeta[i] + costs[i].r;
    }

    Eigen::PartialPivLU<Mat> lu(S);
    const Mat X = lu.solve(Y);
    const double residual = (S * X - Y).cwiseAbs().maxCoeff();
    const double y_scale = std::max(1.0, Y.cwiseAbs().maxCoeff());
    if (!X.allFinite() || residual > 1e-8 * y_scale) {
      throw SolveFailure("singular stage system in LQ game recursion", k);
    }

    for (int i = 0; i < num_players; ++i) {
      strategies[i].gains[k] = X.block(uoff[i], 0, udim[i], n);
      strategies[i].feedforwards[k] = X.block(uoff[i], n, udim[i], 1);
    }

    // Closed-loop transition under the new strategies.
    Mat F = lin.A;
    Vec beta = Vec::Zero(n);
    for (int j = 0; j < num_players; ++j) {
      F.noalias() -= lin.B[j] * strategies[j].gains[k];
      beta.noalias() -= lin.B[j] * strategies[j].feedforwards[k];
    }

    for (int i = 0; i < num_players; ++i) {
      const Mat& P_i = strategies[i].gains[k];
      zeta[i] = costs[i].l - P_i.transpose() * costs[i].r +
                F.transpose() * (zeta[i] + Z[i] * beta);
      Mat Znew = costs[i].Q + F.transpose() * Z[i] * F;
      for (int j = 0; j < num_players; ++j) {
        const Mat& P_j = strategies[j].gains[k];
        Znew.noalias() += P_j.transpose() * costs[i].R[j] * P_j;
        zeta[i].noalias() += P_j.transpose() *
                             (costs[i].R[j] * strategies[j].feedforwards[k]);
      }
      if (diag != nullptr) {
        const double asym = (Znew - Znew.transpose()).cwiseAbs().maxCoeff() /
                            std::max(1.0, Znew.cwiseAbs().maxCoeff());
        diag->max_value_asymmetry = std::max(diag->max_value_asymmetry, asym);
      }
      Z[i] = 0.5 * (Znew + Znew.transpose()).eval();
    }
  }
  return strategies;
}

Trajectory lq_rollout(const std::vector<LqGameStage>& stages,
                      const std::vector<AffineStrategy>& profile,
                      const Vec& x0) {
  const int T = static_cast<int>(stages.size());
  const int num_players = static_cast<int>(profile.size());
  Trajectory traj;
  traj.states.reserve(T + 1);
  traj.controls.reserve(T);
  traj.states.push_back(x0);
  for (int k = 0; k < T; ++k) {
    int total_udim = 0;
    for (int j = 0; j < num_players; ++j) {
      total_udim += static_cast<int>(profile[j].gains[k].rows());
    }
    Vec u(total_udim);
    int off = 0;
    for (int j = 0; j < num_players; ++j) {
      const int m = static_cast<int>(profile[j].gains[k].rows());
      u.segment(off, m) = -profile[j].gains[k] * traj.states.back() -
                          profile[j].feedforwards[k];
      off += m;
    }
    Vec next = stages[k].dynamics.A * traj.states.back();
    off = 0;
    for (int j = 0; j < num_players; ++j) {
      const int m = static_cast<int>(profile[j].gains[k].rows());
      next.noalias() += stages[k].dynamics.B[j] * u.segment(off, m);
      off += m;
    }
    traj.controls.push_back(std::move(u));
    traj.states.push_back(std::move(next));
  }
  return traj;
}

double lq_player_cost(const std::vector<LqGameStage>& stages,
                      const std::vector<TerminalQuadratics>& terminal,
                      const Trajectory& traj, int player) {
  const int T = static_cast<int>(stages.size());
  double cost = 0.0;
  for (int k = 0; k < T; ++k) {
    const auto& c = stages[k].costs[player];
    const Vec& x = traj.states[k];
    cost += 0.5 * x.dot(c.Q * x) + c.l.dot(x);
    int off = 0;
    for (size_t j = 0; j < c.R.size(); ++j) {
      const int m = static_cast<int>(c.R[j].rows());
      const Vec uj = traj.controls[k].segment(off, m);
      cost += 0.5 * uj.dot(c.R[j] * uj);
      if (static_cast<int>(j) == player) cost += c.r.dot(uj);
      off += m;
    }
  }
  const Vec& xT = traj.states[T];
  cost += 0.5 * xT.dot(terminal[player].Q * xT) + terminal[player].l.dot(xT);
  return cost;
}

LqNashReport verify_lq_nash(const std::vector<LqGameStage>& stages,
                            const std::vector<TerminalQuadratics>& terminal,
                            const std::vector<AffineStrategy>& profile,
                            int trials, double scale, uint64_t rng_seed,
                            double tol) {
  const int num_players = static_cast<int>(profile.size());
  const int n = static_cast<int>(stages[0].dynamics.A.rows());
  Rng rng(rng_seed);

  LqNashReport report;
  report.min_cost_delta.assign(num_players, 0.0);
  double worst = 0.0;

  for (int i = 0; i < num_players; ++i) {
    for (int trial = 0; trial < trials; ++trial) {
      Vec x0(n);
      for (int d = 0; d < n; ++d) x0[d] = rng.normal();

      const double base =
          lq_player_cost(stages, terminal, lq_rollout(stages, profile, x0), i);

      std::vector<AffineStrategy> perturbed = profile;
      for (int k = 0; k < profile[i].horizon(); ++k) {
        Mat dP(perturbed[i].gains[k].rows(), perturbed[i].gains[k].cols());
        for (int r = 0; r < dP.rows(); ++r)
          for (int c = 0; c < dP.cols(); ++c) dP(r, c) = rng.normal();
        Vec da(perturbed[i].feedforwards[k].size());
        for (int r = 0; r < da.size(); ++r) da[r] = rng.normal();
        perturbed[i].gains[k] += scale * dP;
        perturbed[i].feedforwards[k] += scale * da;
      }

      const double pert = lq_player_cost(
          stages, terminal, lq_rollout(stages, perturbed, x0), i);
      const double delta = pert - base;
      report.min_cost_delta[i] = std::min(report.min_cost_delta[i], delta);
      if (delta < -tol * std::max(1.0, std::abs(base))) {
        report.passed = false;
        if (delta < worst) {
          worst = delta;
          report.worst_player = i;
        }
      }
    }
  }
  return report;
}

}  // namespace eqalign
