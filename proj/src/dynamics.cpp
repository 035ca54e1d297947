#include "eqalign/dynamics.hpp"

#include <cmath>

namespace eqalign {

int DynamicalSystem::total_control_dim() const {
  int total = 0;
  for (int i = 0; i < num_players(); ++i) total += control_dim(i);
  return total;
}

int DynamicalSystem::control_offset(int player) const {
  int offset = 0;
  for (int i = 0; i < player; ++i) offset += control_dim(i);
  return offset;
}

void DynamicalSystem::check_dims(const Vec& x, const Vec& u) const {
  if (x.size() != state_dim() || u.size() != total_control_dim()) {
    throw DimensionError("state/control dimension mismatch");
  }
}

Vec DynamicalSystem::integrate(int step, const Vec& x, const Vec& u,
                               double dt) const {
  check_dims(x, u);
  if (dt <= 0.0) throw std::invalid_argument("integrate: dt must be positive");
  if (!x.allFinite() || !u.allFinite()) {
    throw DivergenceError("integrate: non-finite state or control");
  }

  const Vec k1 = flow(step, x, u);
  const Vec k2 = flow(step, x + 0.5 * dt * k1, u);
  const Vec k3 = flow(step, x + 0.5 * dt * k2, u);
  const Vec k4 = flow(step, x + dt * k3, u);
  return x + (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4);
}

LinearizedDynamics DynamicalSystem::linearize_step(int step, const Vec& x,
                                                   const Vec& u,
                                                   double dt) const {
  check_dims(x, u);
  const int n = state_dim();
  const int m = total_control_dim();

  Mat fx(n, n), fu(n, m);
  const Vec k1 = flow(step, x, u);
  flow_jacobians(step, x, u, fx, fu);
  Mat J1x = fx;
  Mat J1u = fu;

  const Vec x2 = x + 0.5 * dt * k1;
  const Vec k2 = flow(step, x2, u);
  flow_jacobians(step, x2, u, fx, fu);
  Mat J2x = fx * (Mat::Identity(n, n) + 0.5 * dt * J1x);
  Mat J2u = fu + fx * (0.5 * dt * J1u);

  const Vec x3 = x + 0.5 * dt * k2;
  const Vec k3 = flow(step, x3, u);
  flow_jacobians(step, x3, u, fx, fu);
  Mat J3x = fx * (Mat::Identity(n, n) + 0.5 * dt * J2x);
  Mat J3u = fu + fx * (0.5 * dt * J2u);

  const Vec x4 = x + dt * k3;
  flow_jacobians(step, x4, u, fx, fu);
  Mat J4x = fx * (Mat::Identity(n, n) + dt * J3x);
  Mat J4u = fu + fx * (dt * J3u);
  (void)k3;

  LinearizedDynamics lin;
  lin.A = Mat::Identity(n, n) + (dt / 6.0) * (J1x + 2.0 * (J2x + J3x) + J4x);
  const Mat B_full = (dt / 6.0) * (J1u + 2.0 * (J2u + J3u) + J4u);
  lin.B.reserve(num_players());
  for (int i = 0; i < num_players(); ++i) {
    lin.B.push_back(B_full.middleCols(control_offset(i), control_dim(i)));
  }
  return lin;
}

UnicycleDynamics::UnicycleDynamics(int num_players) : num_players_(num_players) {
  if (num_players < 1) throw std::invalid_argument("need at least one player");
}

Vec UnicycleDynamics::flow(int /*step*/, const Vec& x, const Vec& u) const {
  check_dims(x, u);
  Vec dx(state_dim());
  for (int i = 0; i < num_players_; ++i) {
    const double theta = x[4 * i + 2];
    const double v = x[4 * i + 3];
    dx[4 * i + 0] = v * std::cos(theta);
    dx[4 * i + 1] = v * std::sin(theta);
    dx[4 * i + 2] = u[2 * i + 0];
    dx[4 * i + 3] = u[2 * i + 1];
  }
  return dx;
}

void UnicycleDynamics::flow_jacobians(int /*step*/, const Vec& x, const Vec& u,
                                      Mat& fx, Mat& fu) const {
  check_dims(x, u);
  fx.setZero(state_dim(), state_dim());
  fu.setZero(state_dim(), total_control_dim());
  for (int i = 0; i < num_players_; ++i) {
    const double theta = x[4 * i + 2];
    const double v = x[4 * i + 3];
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    fx(4 * i + 0, 4 * i + 2) = -v * s;
    fx(4 * i + 0, 4 * i + 3) = c;
    fx(4 * i + 1, 4 * i + 2) = v * c;
    fx(4 * i + 1, 4 * i + 3) = s;
    fu(4 * i + 2, 2 * i + 0) = 1.0;
    fu(4 * i + 3, 2 * i + 1) = 1.0;
  }
}

std::vector<LinearizedDynamics> linearize(const DynamicalSystem& dynamics,
                                          const Trajectory& nominal,
                                          double dt) {
  if (nominal.states.size() != nominal.controls.size() + 1) {
    throw DimensionError("linearize: trajectory has inconsistent lengths");
  }
  std::vector<LinearizedDynamics> out;
  out.reserve(nominal.controls.size());
  for (int k = 0; k < nominal.horizon(); ++k) {
    out.push_back(
        dynamics.linearize_step(k, nominal.states[k], nominal.controls[k], dt));
  }
  return out;
}

}  // namespace eqalign
