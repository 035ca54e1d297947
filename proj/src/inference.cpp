#include "eqalign/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace eqalign {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kPi = 3.14159265358979323846;

// log(exp(a) + exp(b)) without overflow.
double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

}  // namespace

std::vector<std::vector<AffineStrategy>> sample_seeds(
    const SeedDistribution& dist, const GameDefinition& game, int count,
    uint64_t rng_seed) {
  if (count < 1) throw std::invalid_argument("sample_seeds: count must be >= 1");
  if (dist.turn_rate_min > dist.turn_rate_max ||
      dist.accel_min > dist.accel_max) {
    throw std::invalid_argument("sample_seeds: empty parameter range");
  }
  Rng rng(rng_seed);
  const int T = game.horizon_steps;
  const double duration = T * game.dt;
  const int n = game.dynamics->state_dim();

  std::vector<std::vector<AffineStrategy>> profiles(count);
  for (int k = 0; k < count; ++k) {
    profiles[k].reserve(game.num_players());
    for (int i = 0; i < game.num_players(); ++i) {
      const double beta_w = rng.uniform(dist.turn_rate_min, dist.turn_rate_max);
      const double beta_a = rng.uniform(dist.accel_min, dist.accel_max);
      AffineStrategy s = AffineStrategy::zero(T, n, game.dynamics->control_dim(i));
      for (int t = 0; t < T; ++t) {
        const double phase = std::cos(t * game.dt * kPi / duration);
        s.feedforwards[t][0] = beta_w * phase;
        s.feedforwards[t][1] = beta_a * phase;
      }
      profiles[k].push_back(std::move(s));
    }
  }
  return profiles;
}

void Belief::normalize() {
  double lse = kNegInf;
  for (const auto& p : particles) lse = log_add_exp(lse, p.log_weight);
  if (lse == kNegInf) {
    throw EstimatorCollapse("belief normalize: all particles eliminated");
  }
  for (auto& p : particles) p.log_weight -= lse;
}

std::vector<double> Belief::normalized_weights() const {
  double lse = kNegInf;
  for (const auto& p : particles) lse = log_add_exp(lse, p.log_weight);
  if (lse == kNegInf) {
    throw EstimatorCollapse("belief weights: all particles eliminated");
  }
  std::vector<double> w(particles.size());
  for (size_t i = 0; i < particles.size(); ++i) {
    w[i] = std::exp(particles[i].log_weight - lse);
  }
  return w;
}

int Belief::map_index() const {
  int best = -1;
  for (size_t i = 0; i < particles.size(); ++i) {
    if (!particles[i].alive()) continue;
    if (best < 0 || particles[i].log_weight > particles[best].log_weight ||
        (particles[i].log_weight == particles[best].log_weight &&
         particles[i].id < particles[best].id)) {
      best = static_cast<int>(i);
    }
  }
  if (best < 0) throw EstimatorCollapse("belief MAP: all particles eliminated");
  return best;
}

void Belief::prune(double log_drop) {
  double max_logw = kNegInf;
  for (const auto& p : particles) max_logw = std::max(max_logw, p.log_weight);
  if (max_logw == kNegInf) {
    throw EstimatorCollapse("belief prune: all particles eliminated");
  }
  std::erase_if(particles, [&](const Particle& p) {
    return p.log_weight < max_logw - log_drop;
  });
}

int Belief::representative_of(int original_id) const {
  int id = original_id;
  auto it = merged_into_.find(id);
  while (it != merged_into_.end()) {
    id = it->second;
    it = merged_into_.find(id);
  }
  return id;
}

void Belief::record_merge(int absorbed, int representative) {
  merged_into_[absorbed] = representative;
}

Belief init_belief(const GameDefinition& game,
                   const std::vector<std::vector<AffineStrategy>>& seeds,
                   const Vec& x0, const SolverSettings& settings) {
  Belief belief;
  belief.particles.resize(seeds.size());
  for (size_t k = 0; k < seeds.size(); ++k) {
    Particle& p = belief.particles[k];
    p.id = static_cast<int>(k);
    try {
      p.last_result = ilq_solve(game, x0, seeds[k], settings);
      p.strategies = p.last_result.strategies;
      p.log_weight = 0.0;
    } catch (const std::runtime_error&) {
      p.strategies = seeds[k];
      p.log_weight = kNegInf;
    }
  }
  belief.normalize();
  return belief;
}

Vec predict_step(const GameDefinition& game, const Particle& particle,
                 const Vec& x_prev, const Vec* u_robot, int robot_index) {
  const auto& dyn = *game.dynamics;
  Vec u(dyn.total_control_dim());
  for (int i = 0; i < game.num_players(); ++i) {
    const int off = dyn.control_offset(i);
    const int m = dyn.control_dim(i);
    if (u_robot != nullptr && i == robot_index) {
      u.segment(off, m) = *u_robot;
    } else {
      u.segment(off, m) = particle.strategies[i].control(0, x_prev);
    }
  }
  return dyn.integrate(0, x_prev, u, game.dt);
}

double gaussian_log_likelihood(const Vec& x, const Vec& xhat, double epsilon) {
  if (epsilon <= 0.0) throw std::invalid_argument("epsilon must be positive");
  if (x.size() != xhat.size()) throw DimensionError("likelihood: size mismatch");
  const double d = static_cast<double>(x.size());
  return -0.5 * d * std::log(2.0 * kPi * epsilon) -
         (x - xhat).squaredNorm() / (2.0 * epsilon);
}

double trajectory_position_distance(const Trajectory& a, const Trajectory& b,
                                    int num_players) {
  const size_t steps = std::min(a.states.size(), b.states.size());
  double dist = 0.0;
  for (size_t k = 0; k < steps; ++k) {
    double sq = 0.0;
    for (int i = 0; i < num_players; ++i) {
      sq += (a.states[k].segment<2>(4 * i) - b.states[k].segment<2>(4 * i))
                .squaredNorm();
    }
    dist = std::max(dist, std::sqrt(sq));
  }
  return dist;
}

std::vector<std::pair<int, int>> combine_duplicates(Belief& belief,
                                                    double merge_tol,
                                                    int num_players) {
  std::vector<std::pair<int, int>> merges;
  // Order by weight (ties by id) so clusters collapse onto the
  // highest-weight member.
  std::vector<int> order;
  for (size_t i = 0; i < belief.particles.size(); ++i) {
    if (belief.particles[i].alive()) order.push_back(static_cast<int>(i));
  }
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const auto& pa = belief.particles[a];
    const auto& pb = belief.particles[b];
    if (pa.log_weight != pb.log_weight) return pa.log_weight > pb.log_weight;
    return pa.id < pb.id;
  });

  std::vector<bool> absorbed(belief.particles.size(), false);
  for (size_t a = 0; a < order.size(); ++a) {
    const int rep = order[a];
    if (absorbed[rep]) continue;
    for (size_t b = a + 1; b < order.size(); ++b) {
      const int other = order[b];
      if (absorbed[other]) continue;
      const double dist = trajectory_position_distance(
          belief.particles[rep].last_result.trajectory,
          belief.particles[other].last_result.trajectory, num_players);
      if (dist <= merge_tol) {
        belief.particles[rep].log_weight =
            log_add_exp(belief.particles[rep].log_weight,
                        belief.particles[other].log_weight);
        belief.record_merge(belief.particles[other].id,
                            belief.particles[rep].id);
        merges.emplace_back(belief.particles[other].id,
                            belief.particles[rep].id);
        absorbed[other] = true;
      }
    }
  }

  std::vector<Particle> kept;
  kept.reserve(belief.particles.size());
  for (size_t i = 0; i < belief.particles.size(); ++i) {
    if (!absorbed[i]) kept.push_back(std::move(belief.particles[i]));
  }
  belief.particles = std::move(kept);
  return merges;
}

std::pair<int, const AffineStrategy*> map_strategy(const Belief& belief,
                                                   int player) {
  const int idx = belief.map_index();
  return {belief.particles[idx].id, &belief.particles[idx].strategies[player]};
}

std::vector<AffineStrategy> shift_profile(
    const std::vector<AffineStrategy>& profile, int steps) {
  if (steps == 0) return profile;
  std::vector<AffineStrategy> shifted(profile.size());
  for (size_t i = 0; i < profile.size(); ++i) {
    if (steps >= profile[i].horizon()) {
      throw DimensionError("shift_profile: nothing left of the horizon");
    }
    shifted[i].gains.assign(profile[i].gains.begin() + steps,
                            profile[i].gains.end());
    shifted[i].feedforwards.assign(profile[i].feedforwards.begin() + steps,
                                   profile[i].feedforwards.end());
  }
  return shifted;
}

PlannerStep map_planner_step(Belief& belief, const GameDefinition& game,
                             const Vec& x_t, const Vec& x_prev,
                             const Vec* u_applied, int warm_shift,
                             const SolverSettings& settings,
                             const InferenceParams& params) {
  // Per-particle transition and reweighting. Each particle's work is
  // independent of the others; merge and MAP extraction happen afterwards.
  for (auto& p : belief.particles) {
    if (!p.alive()) continue;
    try {
      p.last_result = ilq_solve(
          game, x_prev, shift_profile(p.strategies, warm_shift), settings);
      p.strategies = p.last_result.strategies;
      const Vec xhat =
          predict_step(game, p, x_prev, u_applied, params.robot_index);
      if (!xhat.allFinite()) {
        p.log_weight = kNegInf;
        continue;
      }
      p.log_weight += gaussian_log_likelihood(x_t, xhat, params.epsilon_obs);
    } catch (const std::runtime_error&) {
      p.log_weight = kNegInf;
    }
  }

  belief.normalize();
  belief.prune(params.prune_log_drop);
  auto merges = combine_duplicates(belief, params.merge_tol,
                                   game.num_players());
  belief.normalize();

  PlannerStep step;
  step.merges = std::move(merges);
  const int idx = belief.map_index();
  step.map_id = belief.particles[idx].id;
  if (u_applied != nullptr && game.horizon_steps >= 2) {
    // The particle was re-solved from the previous state, so the law for the
    // current step sits at index 1 of its horizon.
    step.robot_control =
        belief.particles[idx].strategies[params.robot_index].control(1, x_t);
  }
  return step;
}

}  // namespace eqalign
