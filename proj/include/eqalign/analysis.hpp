#pragma once

#include "eqalign/types.hpp"

#include <vector>

namespace eqalign {

// Flattened joint-position sequence of a trajectory: per time step the
// stacked (px, py) of every player.
Vec trajectory_position_feature(const Trajectory& traj, int num_players);

struct KmeansResult {
  int k = 0;
  std::vector<int> assignment;
  Mat centroids;  // k x dim
  double inertia = 0.0;
  // Inertia after each Lloyd iteration of the winning restart.
  std::vector<double> inertia_trace;
};

// Standard k-means with k-means++ initialization; `restarts` independent
// starts, best inertia kept. Deterministic in rng_seed.
KmeansResult kmeans_cluster(const Mat& features, int k, uint64_t rng_seed,
                            int restarts = 20, int max_iterations = 100);

// Elbow criterion: grows k while each added cluster still explains at least
// `improvement_threshold` of the total (k=1) inertia.
int select_k(const Mat& features, int k_max, uint64_t rng_seed,
             double improvement_threshold = 0.04);

struct ClusterReport {
  int k = 0;
  std::vector<std::vector<int>> members;            // sample indices
  std::vector<std::vector<double>> mean_player_costs;  // per cluster
  std::vector<int> representative;  // medoid sample index per cluster
  std::vector<double> handedness;   // of each representative
};

ClusterReport build_cluster_report(const Mat& features,
                                   const KmeansResult& clustering,
                                   const std::vector<Trajectory>& trajectories,
                                   const std::vector<std::vector<double>>& costs,
                                   int num_players);

// Squared joint-position prediction error per offset. Both sequences must
// have the same length.
std::vector<double> prediction_error(const std::vector<Vec>& predicted_states,
                                     const std::vector<Vec>& actual_states,
                                     int num_players);
std::vector<double> prediction_error(const Trajectory& predicted,
                                     const Trajectory& actual,
                                     int num_players);

// Mean normalized angular momentum of the players about the origin:
// near +-1 for coordinated circular motion, near 0 for straight passes.
// The sign distinguishes counter-clockwise from clockwise.
double handedness(const Trajectory& traj, int num_players);

// Index of the player that reaches its closest approach to the origin first.
int first_passer(const Trajectory& traj, int num_players);

}  // namespace eqalign
