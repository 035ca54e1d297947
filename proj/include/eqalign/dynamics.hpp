#pragma once

#include "eqalign/types.hpp"

#include <memory>
#include <vector>

namespace eqalign {

// Discrete-time Jacobians of one integration step about a nominal point:
//   dx(k+1) = A dx(k) + sum_i B[i] du_i(k).
// Error-state form: with zero deviations the nominal step is reproduced exactly.
struct LinearizedDynamics {
  Mat A;               // n x n
  std::vector<Mat> B;  // per player, n x m_i
};

// Joint dynamics of all players. Subclasses provide the continuous-time flow
// and its Jacobians; integration (RK4, zero-order-hold controls) and discrete
// linearization are derived here so the LQ approximation stays consistent
// with the simulator.
class DynamicalSystem {
 public:
  virtual ~DynamicalSystem() = default;

  virtual int num_players() const = 0;
  virtual int state_dim() const = 0;
  virtual int control_dim(int player) const = 0;

  int total_control_dim() const;
  int control_offset(int player) const;

  // Continuous-time state derivative. The step index is threaded through for
  // generality; the unicycle product ignores it.
  virtual Vec flow(int step, const Vec& x, const Vec& u) const = 0;
  virtual void flow_jacobians(int step, const Vec& x, const Vec& u, Mat& fx,
                              Mat& fu) const = 0;

  // One RK4 step with the control held constant. Deterministic.
  Vec integrate(int step, const Vec& x, const Vec& u, double dt) const;

  // Exact Jacobian of the RK4 step (chain rule through the stages).
  LinearizedDynamics linearize_step(int step, const Vec& x, const Vec& u,
                                    double dt) const;

  void check_dims(const Vec& x, const Vec& u) const;
};

// Product of independent 4D unicycles. Per player the state block is
// [px, py, theta, v] and the control block is [omega, a]:
//   d/dt [px; py; theta; v] = [v cos(theta); v sin(theta); omega; a].
// Headings are kept unwrapped so the linearization stays smooth.
class UnicycleDynamics final : public DynamicalSystem {
 public:
  explicit UnicycleDynamics(int num_players);

  int num_players() const override { return num_players_; }
  int state_dim() const override { return 4 * num_players_; }
  int control_dim(int) const override { return 2; }

  Vec flow(int step, const Vec& x, const Vec& u) const override;
  void flow_jacobians(int step, const Vec& x, const Vec& u, Mat& fx,
                      Mat& fu) const override;

 private:
  int num_players_;
};

// Per-step Jacobians of the discrete-time map along a dynamically consistent
// nominal trajectory. One entry per control step.
std::vector<LinearizedDynamics> linearize(const DynamicalSystem& dynamics,
                                          const Trajectory& nominal,
                                          double dt);

}  // namespace eqalign
