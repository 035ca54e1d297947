#include "eqalign/simulation.hpp"

#include <cmath>

namespace eqalign {

namespace {

Vec stacked_positions(const Vec& state, int num_players) {
  Vec p(2 * num_players);
  for (int i = 0; i < num_players; ++i) {
    p.segment<2>(2 * i) = state.segment<2>(4 * i);
  }
  return p;
}

std::vector<Vec> plan_positions(const Trajectory& plan, int num_players) {
  std::vector<Vec> out;
  out.reserve(plan.states.size());
  for (const Vec& x : plan.states) out.push_back(stacked_positions(x, num_players));
  return out;
}

BeliefRecord snapshot_belief(const Belief& belief, int t, int map_id,
                             std::vector<std::pair<int, int>> merges,
                             int truth_id, int num_players,
                             const std::vector<int>& offsets) {
  BeliefRecord rec;
  rec.t = t;
  rec.map_id = map_id;
  rec.merges = std::move(merges);
  const auto weights = belief.normalized_weights();
  for (size_t i = 0; i < belief.particles.size(); ++i) {
    const Particle& p = belief.particles[i];
    ParticleSnapshot snap;
    snap.id = p.id;
    snap.log_weight = p.log_weight;
    snap.weight = weights[i];
    for (int off : offsets) {
      if (off < static_cast<int>(p.last_result.trajectory.states.size())) {
        snap.short_prediction.push_back(
            stacked_positions(p.last_result.trajectory.states[off], num_players));
      }
    }
    rec.particles.push_back(std::move(snap));
  }
  if (truth_id >= 0) {
    rec.truth_representative = belief.representative_of(truth_id);
    for (size_t i = 0; i < belief.particles.size(); ++i) {
      if (belief.particles[i].id == rec.truth_representative) {
        rec.truth_weight = weights[i];
        break;
      }
    }
  }
  return rec;
}

}  // namespace

std::vector<int> short_prediction_offsets(int plan_steps) {
  std::vector<int> offsets;
  for (int off : {10, 20, 50}) {
    if (off <= plan_steps) offsets.push_back(off);
  }
  return offsets;
}

std::vector<double> realized_costs(const GameDefinition& game,
                                   const std::vector<StepRecord>& steps) {
  Trajectory traj;
  for (const auto& s : steps) {
    traj.states.push_back(s.x);
    if (s.u.size() > 0) traj.controls.push_back(s.u);
  }
  return player_costs(game, traj);
}

RunResult simulate_run(const ScenarioConfig& config,
                       const SimulationOptions& options, uint64_t run_index) {
  config.validate();
  GameDefinition game = make_game(config);
  const auto& dyn = *game.dynamics;
  const Vec x0 = initial_joint_state(config);
  const int sim_steps = config.sim_steps();
  const int last_step = options.max_steps > 0
                            ? std::min(options.max_steps, sim_steps)
                            : sim_steps;
  const int num_players = config.players;
  const int robot = config.robot_index;
  const bool robot_active = options.kind == ExperimentKind::kPlan;
  const auto offsets = short_prediction_offsets(config.plan_steps());

  // The episode is one fixed-deadline game: replanning at step t solves the
  // remaining-time game, so the goal deadline does not slide away.
  const auto horizon_at = [&](int t) {
    return std::min(config.plan_steps(), sim_steps - t);
  };

  const Rng run_rng = Rng(config.rng_seed).split(run_index);

  // Hidden equilibrium of the human players.
  const int belief_size =
      options.mode == AgentMode::kRandomBaseline ? 1 : config.particles;
  const uint64_t observer_seed = run_rng.split(1).next();
  game.horizon_steps = horizon_at(0);
  const auto observer_seeds =
      sample_seeds(config.seeds, game, belief_size, observer_seed);

  RunResult out;
  std::vector<AffineStrategy> humans_seed;
  if (options.ground_truth_particle >= 0) {
    out.truth_particle_id = options.ground_truth_particle % belief_size;
    humans_seed = observer_seeds[out.truth_particle_id];
  } else {
    humans_seed =
        sample_seeds(config.seeds, game, 1, run_rng.split(0).next())[0];
  }
  for (const auto& s : humans_seed) {
    out.truth_seed_params.push_back(s.feedforwards[0][0]);
    out.truth_seed_params.push_back(s.feedforwards[0][1]);
  }

  SolveResult humans = ilq_solve(game, x0, humans_seed, config.solver);
  Belief belief = init_belief(game, observer_seeds, x0, config.solver);
  const InferenceParams params{config.epsilon_obs, config.merge_tol, robot,
                               700.0};
  Rng noise_rng = run_rng.split(3);

  // Initial snapshot with uniform weights and the initial plans.
  {
    const int map_idx = belief.map_index();
    out.belief.push_back(snapshot_belief(belief, 0,
                                         belief.particles[map_idx].id, {},
                                         out.truth_particle_id, num_players,
                                         offsets));
    out.predictions.push_back(
        {0, plan_positions(belief.particles[map_idx].last_result.trajectory,
                           num_players)});
  }

  Vec x = x0;
  Vec x_prev;
  Vec robot_applied;  // block applied over the previous interval
  Vec robot_next;     // control chosen for the current step, if any

  for (int t = 0; t <= last_step; ++t) {
    if (t > 0) {
      // Particles re-solve from the previous state over the game remaining
      // there. Their stored strategies originate one step earlier (same
      // origin at t=1), so they shift by the horizon difference.
      game.horizon_steps = horizon_at(t - 1);
      const int warm_shift =
          horizon_at(std::max(t - 2, 0)) - game.horizon_steps;
      PlannerStep ps = map_planner_step(
          belief, game, x, x_prev, robot_active ? &robot_applied : nullptr,
          warm_shift, config.solver, params);
      out.belief.push_back(snapshot_belief(belief, t, ps.map_id,
                                           std::move(ps.merges),
                                           out.truth_particle_id, num_players,
                                           offsets));
      for (const auto& p : belief.particles) {
        if (p.id == ps.map_id) {
          out.predictions.push_back(
              {t - 1, plan_positions(p.last_result.trajectory, num_players)});
          break;
        }
      }
      robot_next = ps.robot_control;
    } else if (robot_active) {
      const auto [map_id, strategy] = map_strategy(belief, robot);
      robot_next = strategy->control(0, x);
      (void)map_id;
    }

    if (t == last_step) {
      out.steps.push_back({t, x, Vec()});
      break;
    }

    Vec u(dyn.total_control_dim());
    for (int j = 0; j < num_players; ++j) {
      const int off = dyn.control_offset(j);
      const int m = dyn.control_dim(j);
      if (robot_active && j == robot) {
        u.segment(off, m) = robot_next;
      } else {
        u.segment(off, m) = humans.strategies[j].control(0, x);
        if (config.human_noise_std > 0.0) {
          for (int d = 0; d < m; ++d) {
            u[off + d] += noise_rng.normal(0.0, config.human_noise_std);
          }
        }
      }
    }
    out.steps.push_back({t, x, u});
    if (robot_active) robot_applied = u.segment(dyn.control_offset(robot),
                                                dyn.control_dim(robot));

    x_prev = x;
    x = dyn.integrate(t, x, u, config.dt);

    // Humans replan from the new state over the remaining game.
    if (t + 1 < sim_steps) {
      const int shift = horizon_at(t) - horizon_at(t + 1);
      game.horizon_steps = horizon_at(t + 1);
      humans = ilq_solve(game, x, shift_profile(humans.strategies, shift),
                         config.solver);
    }
  }

  out.player_costs = realized_costs(game, out.steps);
  return out;
}

}  // namespace eqalign
