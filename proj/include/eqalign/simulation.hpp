#pragma once

#include "eqalign/inference.hpp"
#include "eqalign/scenario.hpp"
#include "eqalign/types.hpp"

#include <vector>

namespace eqalign {

// Robot behavior in closed-loop runs. A run with a single random particle is
// the fixed-equilibrium baseline; the particle machinery is shared.
enum class AgentMode { kMapAligned, kRandomBaseline };

enum class ExperimentKind {
  kPlan,     // the robot player acts
  kPredict,  // pure observer: every player is driven by the hidden equilibrium
};

struct SimulationOptions {
  ExperimentKind kind = ExperimentKind::kPlan;
  AgentMode mode = AgentMode::kMapAligned;
  // When >= 0, the hidden equilibrium is the observer's own seed with this
  // index instead of a fresh draw (the ground truth is then a known particle).
  int ground_truth_particle = -1;
  // Stop after this many steps (0: run the whole episode). The episode's
  // deadline stays where it is; only the simulated prefix shortens.
  int max_steps = 0;
};

struct StepRecord {
  int t = 0;
  Vec x;
  Vec u;  // empty for the final state
};

struct ParticleSnapshot {
  int id = 0;
  double log_weight = 0.0;
  double weight = 0.0;
  // Predicted joint positions at a few fixed look-ahead offsets (diagnostic
  // subsample of the particle's plan).
  std::vector<Vec> short_prediction;
};

struct BeliefRecord {
  int t = 0;
  int map_id = -1;
  std::vector<ParticleSnapshot> particles;
  std::vector<std::pair<int, int>> merges;  // absorbed id -> representative id
  int truth_representative = -1;
  double truth_weight = 0.0;
};

struct PredictionRecord {
  int origin_step = 0;
  std::vector<Vec> positions;  // stacked joint positions over the plan horizon
};

struct RunResult {
  std::vector<StepRecord> steps;
  std::vector<BeliefRecord> belief;
  std::vector<PredictionRecord> predictions;
  std::vector<double> player_costs;
  int truth_particle_id = -1;
  std::vector<double> truth_seed_params;  // per player (beta_w, beta_a)
};

// Offsets (in steps) of the subsampled per-particle predictions.
std::vector<int> short_prediction_offsets(int plan_steps);

// One deterministic closed-loop run. All randomness is derived from the
// config seed and the run index, so runs are reproducible independently.
RunResult simulate_run(const ScenarioConfig& config,
                       const SimulationOptions& options, uint64_t run_index);

// Realized cost of each player over a simulated state/control record.
std::vector<double> realized_costs(const GameDefinition& game,
                                   const std::vector<StepRecord>& steps);

}  // namespace eqalign
