#pragma once

#include "eqalign/analysis.hpp"
#include "eqalign/scenario.hpp"
#include "eqalign/simulation.hpp"

#include <string>
#include <vector>

namespace eqalign {

inline constexpr const char* kVersionTag = "eqalign-0.1.0";

struct ArchiveMeta {
  std::string version = kVersionTag;
  std::string command;  // "plan", "predict" or "cluster"
  std::string mode;     // "map-aligned" or "random-baseline"; empty for cluster
  int count = 0;        // runs or samples
  int ground_truth_particle = -1;
};

// One solved sample of the equilibrium-enumeration experiment.
struct ClusterSample {
  int index = 0;
  bool converged = false;
  int iterations = 0;
  std::vector<double> seed_params;  // per player (beta_w, beta_a)
  std::vector<double> costs;
  Trajectory trajectory;
};

struct ClusterOutcome {
  std::vector<ClusterSample> samples;
  std::vector<int> clustered_indices;  // converged sample indices, in order
  int chosen_k = 0;
  KmeansResult clustering;
  ClusterReport report;
};

// A run archive on disk: canonical config echo, metadata, and one record
// stream per run. Re-simulating from the config reproduces it bit-identically.
struct Archive {
  ArchiveMeta meta;
  std::string config_text;
  std::vector<RunResult> runs;      // plan / predict archives
  ClusterOutcome cluster;           // cluster archives
};

void write_archive(const std::string& dir, const Archive& archive);
Archive read_archive(const std::string& dir);

struct ReplayReport {
  bool passed = true;
  std::string first_divergence;  // empty when passed
};

// Field-by-field comparison against a fresh re-simulation; doubles must
// match exactly.
ReplayReport compare_runs(const std::vector<RunResult>& archived,
                          const std::vector<RunResult>& fresh);
ReplayReport compare_cluster(const ClusterOutcome& archived,
                             const ClusterOutcome& fresh);

}  // namespace eqalign
