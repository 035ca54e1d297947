#include "eqalign/ilq_solver.hpp"

#include <cmath>
#include <optional>

namespace eqalign {

namespace {

bool within_guard(const Vec& x, double limit) {
  return x.allFinite() && x.cwiseAbs().maxCoeff() <= limit;
}

// Non-throwing rollout core shared by both public overloads. `reference`
// may be null for offset-form strategies.
std::optional<Trajectory> try_rollout(const GameDefinition& game,
                                      const Vec& x0,
                                      const std::vector<AffineStrategy>& strategies,
                                      const Trajectory* reference, double eta,
                                      double limit) {
  const auto& dyn = *game.dynamics;
  const int T = game.horizon_steps;
  const int num_players = game.num_players();

  Trajectory traj;
  traj.states.reserve(T + 1);
  traj.controls.reserve(T);
  traj.states.push_back(x0);

  Vec u(dyn.total_control_dim());
  for (int k = 0; k < T; ++k) {
    const Vec& x = traj.states.back();
    for (int i = 0; i < num_players; ++i) {
      const int off = dyn.control_offset(i);
      const int m = dyn.control_dim(i);
      if (reference != nullptr) {
        u.segment(off, m) =
            reference->controls[k].segment(off, m) -
            strategies[i].gains[k] * (x - reference->states[k]) -
            eta * strategies[i].feedforwards[k];
      } else {
        u.segment(off, m) = strategies[i].control(k, x);
      }
    }
    if (!u.allFinite()) return std::nullopt;
    Vec next = dyn.integrate(k, x, u, game.dt);
    if (!within_guard(next, limit)) return std::nullopt;
    traj.controls.push_back(u);
    traj.states.push_back(std::move(next));
  }
  return traj;
}

double max_state_change(const Trajectory& a, const Trajectory& b) {
  double delta = 0.0;
  for (size_t k = 0; k < a.states.size(); ++k) {
    delta = std::max(delta, (a.states[k] - b.states[k]).cwiseAbs().maxCoeff());
  }
  return delta;
}

// Re-center deviation-form gains on a new nominal trajectory. The
// feedforward is absorbed into the offset: alpha_i(t) = u_i(t) + P_i(t) x(t).
std::vector<AffineStrategy> recenter(const GameDefinition& game,
                                     const std::vector<AffineStrategy>& dev,
                                     const Trajectory& nominal) {
  const auto& dyn = *game.dynamics;
  std::vector<AffineStrategy> abs(dev.size());
  for (size_t i = 0; i < dev.size(); ++i) {
    const int off = dyn.control_offset(static_cast<int>(i));
    const int m = dyn.control_dim(static_cast<int>(i));
    abs[i].gains = dev[i].gains;
    abs[i].feedforwards.resize(dev[i].horizon());
    for (int k = 0; k < dev[i].horizon(); ++k) {
      abs[i].feedforwards[k] = nominal.controls[k].segment(off, m) +
                               dev[i].gains[k] * nominal.states[k];
    }
  }
  return abs;
}

}  // namespace

Trajectory rollout(const GameDefinition& game, const Vec& x0,
                   const std::vector<AffineStrategy>& strategies,
                   const Trajectory& reference, double eta,
                   double divergence_limit) {
  if (static_cast<int>(reference.controls.size()) != game.horizon_steps) {
    throw DimensionError("rollout: reference horizon mismatch");
  }
  auto traj =
      try_rollout(game, x0, strategies, &reference, eta, divergence_limit);
  if (!traj) throw DivergenceError("rollout diverged");
  return *std::move(traj);
}

Trajectory rollout(const GameDefinition& game, const Vec& x0,
                   const std::vector<AffineStrategy>& strategies,
                   double divergence_limit) {
  auto traj =
      try_rollout(game, x0, strategies, nullptr, 0.0, divergence_limit);
  if (!traj) throw DivergenceError("rollout diverged");
  return *std::move(traj);
}

std::vector<double> player_costs(const GameDefinition& game,
                                 const Trajectory& traj) {
  std::vector<double> costs(game.num_players());
  for (int i = 0; i < game.num_players(); ++i) {
    costs[i] = game.costs[i].total_cost(traj, game.dt);
  }
  return costs;
}

LqApproximation build_lq_approximation(const GameDefinition& game,
                                       const Trajectory& nominal,
                                       double control_reg) {
  LqApproximation approx;
  const int T = nominal.horizon();
  auto lins = linearize(*game.dynamics, nominal, game.dt);
  approx.stages.resize(T);
  for (int k = 0; k < T; ++k) {
    approx.stages[k].dynamics = std::move(lins[k]);
    approx.stages[k].costs.reserve(game.num_players());
    for (int i = 0; i < game.num_players(); ++i) {
      approx.stages[k].costs.push_back(game.costs[i].quadraticize_stage(
          nominal.states[k], nominal.controls[k], game.dt, control_reg));
    }
  }
  approx.terminal.reserve(game.num_players());
  for (int i = 0; i < game.num_players(); ++i) {
    approx.terminal.push_back(
        game.costs[i].quadraticize_terminal(nominal.states[T]));
  }
  return approx;
}

SolveResult ilq_solve(const GameDefinition& game, const Vec& x0,
                      const std::vector<AffineStrategy>& warm_start,
                      const SolverSettings& settings) {
  if (static_cast<int>(warm_start.size()) != game.num_players()) {
    throw DimensionError("ilq_solve: one warm-start strategy per player");
  }
  for (const auto& s : warm_start) {
    if (s.horizon() != game.horizon_steps) {
      throw DimensionError("ilq_solve: warm-start horizon mismatch");
    }
  }

  // The warm start is taken literally to establish the operating point; the
  // interpolation factor only applies to strategy updates inside the loop.
  Trajectory ref =
      rollout(game, x0, warm_start, settings.divergence_limit);
  double prev_cost_sum = 0.0;
  for (double c : player_costs(game, ref)) prev_cost_sum += c;

  SolveResult result;
  result.strategies = warm_start;

  for (int iter = 1; iter <= settings.max_iterations; ++iter) {
    std::vector<AffineStrategy> update;
    double reg = settings.regularization;
    for (int attempt = 0;; ++attempt) {
      try {
        const LqApproximation approx = build_lq_approximation(game, ref, reg);
        update = solve_lq_game(approx.stages, approx.terminal);
        break;
      } catch (const SolveFailure&) {
        if (attempt >= settings.max_regularization_attempts) throw;
        reg *= 100.0;
      }
    }

    // Backtracking line search on the interpolation factor; the joint cost is
    // used as a merit heuristic and the last finite candidate is kept if
    // every factor raises it.
    double eta = settings.step_size;
    std::optional<Trajectory> accepted;
    double accepted_sum = 0.0;
    for (int bt = 0; bt <= settings.max_backtracks; ++bt) {
      auto cand = try_rollout(game, x0, update, &ref, eta,
                              settings.divergence_limit);
      if (cand) {
        double sum = 0.0;
        for (double c : player_costs(game, *cand)) sum += c;
        accepted = std::move(cand);
        accepted_sum = sum;
        if (sum <= prev_cost_sum + 1e-9 * (1.0 + std::abs(prev_cost_sum))) {
          break;
        }
      }
      eta *= settings.backtracking_shrink;
    }
    if (!accepted) {
      if (iter == 1) throw DivergenceError("ilq_solve: rollout diverged");
      result.converged = false;
      break;
    }

    const double delta = max_state_change(*accepted, ref);
    ref = *std::move(accepted);
    prev_cost_sum = accepted_sum;
    result.strategies = recenter(game, update, ref);
    result.iterations = iter;
    if (delta < settings.convergence_tol) {
      result.converged = true;
      break;
    }
  }

  result.trajectory = std::move(ref);
  result.player_costs = player_costs(game, result.trajectory);
  return result;
}

NashReport verify_local_nash(const GameDefinition& game,
                             const SolveResult& result, int trials,
                             double scale, double tol_rel, uint64_t rng_seed) {
  Rng rng(rng_seed);
  NashReport report;
  const Vec& x0 = result.trajectory.states[0];

  for (int i = 0; i < game.num_players(); ++i) {
    const double base = game.costs[i].total_cost(result.trajectory, game.dt);
    for (int trial = 0; trial < trials; ++trial) {
      std::vector<AffineStrategy> perturbed = result.strategies;
      for (int k = 0; k < game.horizon_steps; ++k) {
        Mat& P = perturbed[i].gains[k];
        for (int r = 0; r < P.rows(); ++r)
          for (int c = 0; c < P.cols(); ++c) P(r, c) += scale * rng.normal();
        Vec& a = perturbed[i].feedforwards[k];
        for (int r = 0; r < a.size(); ++r) a[r] += scale * rng.normal();
      }

      auto traj = try_rollout(game, x0, perturbed, nullptr, 0.0, 1e6);
      if (!traj) continue;  // a diverged deviation is never an improvement
      const double pert = game.costs[i].total_cost(*traj, game.dt);
      const double improvement =
          (base - pert) / std::max(std::abs(base), 1e-9);
      if (improvement > report.worst_improvement) {
        report.worst_improvement = improvement;
        report.worst_player = i;
      }
      if (improvement > tol_rel) {
        report.passed = false;
        ++report.improving_trials;
      }
    }
  }
  return report;
}

}  // namespace eqalign
