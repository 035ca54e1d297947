#include "eqalign/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace eqalign {

Vec trajectory_position_feature(const Trajectory& traj, int num_players) {
  const int steps = static_cast<int>(traj.states.size());
  Vec f(2 * num_players * steps);
  for (int k = 0; k < steps; ++k) {
    for (int i = 0; i < num_players; ++i) {
      f.segment<2>(2 * (k * num_players + i)) =
          traj.states[k].segment<2>(4 * i);
    }
  }
  return f;
}

namespace {

double squared_distance(const Mat& features, int row, const Vec& center) {
  return (features.row(row).transpose() - center).squaredNorm();
}

KmeansResult lloyd_once(const Mat& features, int k, Rng& rng,
                        int max_iterations) {
  const int n = static_cast<int>(features.rows());
  const int dim = static_cast<int>(features.cols());

  // k-means++ seeding.
  Mat centers(k, dim);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  int first = static_cast<int>(rng.uniform(0.0, static_cast<double>(n)));
  first = std::min(first, n - 1);
  centers.row(0) = features.row(first);
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(features, i,
                                               centers.row(c - 1).transpose()));
      total += d2[i];
    }
    int chosen = n - 1;
    if (total > 0.0) {
      const double target = rng.uniform(0.0, total);
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc >= target) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = static_cast<int>(rng.uniform(0.0, static_cast<double>(n)));
      chosen = std::min(chosen, n - 1);
    }
    centers.row(c) = features.row(chosen);
  }

  KmeansResult result;
  result.k = k;
  result.assignment.assign(n, 0);

  for (int iter = 0; iter < max_iterations; ++iter) {
    bool changed = false;
    double inertia = 0.0;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = squared_distance(features, i, centers.row(c).transpose());
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (result.assignment[i] != best) changed = true;
      result.assignment[i] = best;
      inertia += best_d;
    }
    result.inertia_trace.push_back(inertia);
    result.inertia = inertia;
    if (!changed && iter > 0) break;

    // Update step; an emptied cluster grabs the point farthest from its
    // center.
    Mat sums = Mat::Zero(k, dim);
    std::vector<int> counts(k, 0);
    for (int i = 0; i < n; ++i) {
      sums.row(result.assignment[i]) += features.row(i);
      ++counts[result.assignment[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        centers.row(c) = sums.row(c) / counts[c];
      } else {
        int farthest = 0;
        double far_d = -1.0;
        for (int i = 0; i < n; ++i) {
          const double d = squared_distance(
              features, i, centers.row(result.assignment[i]).transpose());
          if (d > far_d) {
            far_d = d;
            farthest = i;
          }
        }
        centers.row(c) = features.row(farthest);
      }
    }
  }
  result.centroids = centers;
  return result;
}

}  // namespace

KmeansResult kmeans_cluster(const Mat& features, int k, uint64_t rng_seed,
                            int restarts, int max_iterations) {
  const int n = static_cast<int>(features.rows());
  if (n == 0) throw std::invalid_argument("kmeans: empty input");
  if (k < 1 || k > n) throw std::invalid_argument("kmeans: invalid k");

  Rng base(rng_seed);
  KmeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    Rng rng = base.split(static_cast<uint64_t>(r));
    KmeansResult candidate = lloyd_once(features, k, rng, max_iterations);
    if (candidate.inertia < best.inertia) best = std::move(candidate);
  }
  return best;
}

int select_k(const Mat& features, int k_max, uint64_t rng_seed,
             double improvement_threshold) {
  if (k_max < 1) throw std::invalid_argument("select_k: k_max must be >= 1");
  k_max = std::min(k_max, static_cast<int>(features.rows()));

  const double total_inertia = kmeans_cluster(features, 1, rng_seed).inertia;
  if (total_inertia <= 1e-12) return 1;

  // Improvement is measured as the share of the total (k=1) inertia each
  // added cluster explains; splits below the threshold are within-mode noise.
  double prev_inertia = total_inertia;
  int k = 1;
  while (k < k_max) {
    const double next_inertia =
        kmeans_cluster(features, k + 1, rng_seed).inertia;
    if ((prev_inertia - next_inertia) / total_inertia < improvement_threshold) {
      break;
    }
    prev_inertia = next_inertia;
    ++k;
  }
  return k;
}

ClusterReport build_cluster_report(const Mat& features,
                                   const KmeansResult& clustering,
                                   const std::vector<Trajectory>& trajectories,
                                   const std::vector<std::vector<double>>& costs,
                                   int num_players) {
  ClusterReport report;
  report.k = clustering.k;
  report.members.resize(clustering.k);
  for (size_t i = 0; i < clustering.assignment.size(); ++i) {
    report.members[clustering.assignment[i]].push_back(static_cast<int>(i));
  }

  const int num_costs = costs.empty() ? 0 : static_cast<int>(costs[0].size());
  for (int c = 0; c < clustering.k; ++c) {
    std::vector<double> mean(num_costs, 0.0);
    int medoid = -1;
    double medoid_d = std::numeric_limits<double>::infinity();
    for (int idx : report.members[c]) {
      for (int p = 0; p < num_costs; ++p) mean[p] += costs[idx][p];
      const double d = squared_distance(features, idx,
                                        clustering.centroids.row(c).transpose());
      if (d < medoid_d) {
        medoid_d = d;
        medoid = idx;
      }
    }
    if (!report.members[c].empty()) {
      for (double& m : mean) m /= static_cast<double>(report.members[c].size());
    }
    report.mean_player_costs.push_back(std::move(mean));
    report.representative.push_back(medoid);
    report.handedness.push_back(
        medoid >= 0 ? handedness(trajectories[medoid], num_players) : 0.0);
  }
  return report;
}

std::vector<double> prediction_error(const std::vector<Vec>& predicted_states,
                                     const std::vector<Vec>& actual_states,
                                     int num_players) {
  if (predicted_states.size() != actual_states.size()) {
    throw DimensionError("prediction_error: horizon mismatch");
  }
  std::vector<double> err(predicted_states.size());
  for (size_t k = 0; k < predicted_states.size(); ++k) {
    double sq = 0.0;
    for (int i = 0; i < num_players; ++i) {
      sq += (predicted_states[k].segment<2>(4 * i) -
             actual_states[k].segment<2>(4 * i))
                .squaredNorm();
    }
    err[k] = sq;
  }
  return err;
}

std::vector<double> prediction_error(const Trajectory& predicted,
                                     const Trajectory& actual,
                                     int num_players) {
  return prediction_error(predicted.states, actual.states, num_players);
}

double handedness(const Trajectory& traj, int num_players) {
  double total = 0.0;
  int count = 0;
  for (size_t k = 0; k + 1 < traj.states.size(); ++k) {
    for (int i = 0; i < num_players; ++i) {
      const Eigen::Vector2d p = traj.states[k].segment<2>(4 * i);
      const Eigen::Vector2d step =
          traj.states[k + 1].segment<2>(4 * i) - p;
      const double denom = p.norm() * step.norm();
      if (denom < 1e-9) continue;
      total += (p.x() * step.y() - p.y() * step.x()) / denom;
      ++count;
    }
  }
  return count > 0 ? total / count : 0.0;
}

int first_passer(const Trajectory& traj, int num_players) {
  int winner = 0;
  int winner_step = std::numeric_limits<int>::max();
  for (int i = 0; i < num_players; ++i) {
    int best_step = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < traj.states.size(); ++k) {
      const double d = traj.states[k].segment<2>(4 * i).norm();
      if (d < best_d) {
        best_d = d;
        best_step = static_cast<int>(k);
      }
    }
    if (best_step < winner_step) {
      winner_step = best_step;
      winner = i;
    }
  }
  return winner;
}

}  // namespace eqalign
