#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace eqalign {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Joint states and joint controls over one planning horizon.
// states.size() == controls.size() + 1; controls[k] drives states[k] -> states[k+1].
struct Trajectory {
  std::vector<Vec> states;
  std::vector<Vec> controls;

  int horizon() const { return static_cast<int>(controls.size()); }
};

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Singular stage system in the backward recursion; carries the offending step.
struct SolveFailure : std::runtime_error {
  int step;
  SolveFailure(const std::string& msg, int step_index)
      : std::runtime_error(msg), step(step_index) {}
};

struct EstimatorCollapse : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic RNG with explicit sampling algorithms, so that streams do not
// depend on the standard library's distribution implementations and can be
// split counter-style into independent per-run / per-particle streams.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(splitmix64(seed)), seed_(seed) {}

  uint64_t next() { return engine_(); }

  // Uniform on [lo, hi) with 53-bit resolution.
  double uniform(double lo = 0.0, double hi = 1.0) {
    const double u = static_cast<double>(next() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

  // Standard Box-Muller; keeps no cached state.
  double normal(double mean = 0.0, double stddev = 1.0) {
    const double u1 = (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(next() >> 11) * 0x1.0p-53;
    const double z = std::sqrt(-2.0 * std::log(u1)) *
                     std::cos(2.0 * 3.14159265358979323846 * u2);
    return mean + stddev * z;
  }

  // Independent stream derived from this generator's seed and a counter.
  Rng split(uint64_t stream) const {
    return Rng(splitmix64(seed_ ^ splitmix64(stream + 0x51ed2701)));
  }

 private:
  std::mt19937_64 engine_;
  uint64_t seed_;
};

}  // namespace eqalign
