// Test-only reference implementations, independent of the library code they
// check: finite differences, the closed-form constant-input unicycle arc, and
// a plain discrete-time LQR recursion in condensed form.
#pragma once

#include "eqalign/types.hpp"

#include <functional>
#include <vector>

namespace oracles {

using eqalign::Mat;
using eqalign::Vec;

inline Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x,
                       double eps = 1e-6) {
  Vec g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    Vec hi = x, lo = x;
    hi[i] += eps;
    lo[i] -= eps;
    g[i] = (f(hi) - f(lo)) / (2.0 * eps);
  }
  return g;
}

inline Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x,
                       double eps = 1e-6) {
  const Vec f0 = f(x);
  Mat J(f0.size(), x.size());
  for (int i = 0; i < x.size(); ++i) {
    Vec hi = x, lo = x;
    hi[i] += eps;
    lo[i] -= eps;
    J.col(i) = (f(hi) - f(lo)) / (2.0 * eps);
  }
  return J;
}

inline Mat fd_hessian(const std::function<double(const Vec&)>& f, const Vec& x,
                      double eps = 1e-5) {
  Mat H(x.size(), x.size());
  for (int i = 0; i < x.size(); ++i) {
    Vec hi = x, lo = x;
    hi[i] += eps;
    lo[i] -= eps;
    H.col(i) = (fd_gradient(f, hi, eps) - fd_gradient(f, lo, eps)) / (2.0 * eps);
  }
  return 0.5 * (H + H.transpose()).eval();
}

// Exact solution of the 4D unicycle under constant [omega, a] over time t.
inline Vec unicycle_arc(const Vec& x0, const Vec& u, double t) {
  const double px = x0[0], py = x0[1], th = x0[2], v = x0[3];
  const double w = u[0], a = u[1];
  Vec x(4);
  x[2] = th + w * t;
  x[3] = v + a * t;
  if (std::abs(w) < 1e-12) {
    x[0] = px + (v * t + 0.5 * a * t * t) * std::cos(th);
    x[1] = py + (v * t + 0.5 * a * t * t) * std::sin(th);
    return x;
  }
  auto ix = [&](double tau) {
    return (v + a * tau) * std::sin(th + w * tau) / w +
           a * std::cos(th + w * tau) / (w * w);
  };
  auto iy = [&](double tau) {
    return -(v + a * tau) * std::cos(th + w * tau) / w +
           a * std::sin(th + w * tau) / (w * w);
  };
  x[0] = px + ix(t) - ix(0.0);
  x[1] = py + iy(t) - iy(0.0);
  return x;
}

// Finite-horizon discrete LQR with affine terms, written in the condensed
// Riccati form Z = Q + A'Z'A - P'SP (a different algebraic route than the
// game solver's closed-loop update). Stage cost at step k:
//   1/2 x'Q[k]x + l[k]'x + 1/2 u'R[k]u + r[k]'u,
// terminal 1/2 x'Qf x + lf'x. Optimal law u(k) = -P[k]x - a[k].
struct LqrSolution {
  std::vector<Mat> P;
  std::vector<Vec> a;
};

inline LqrSolution lqr_solve(const std::vector<Mat>& A,
                             const std::vector<Mat>& B,
                             const std::vector<Mat>& Q,
                             const std::vector<Vec>& l,
                             const std::vector<Mat>& R,
                             const std::vector<Vec>& r, const Mat& Qf,
                             const Vec& lf) {
  const int T = static_cast<int>(A.size());
  LqrSolution sol;
  sol.P.resize(T);
  sol.a.resize(T);

  Mat Z = Qf;
  Vec zeta = lf;
  for (int k = T - 1; k >= 0; --k) {
    const Mat S = R[k] + B[k].transpose() * Z * B[k];
    const Eigen::LLT<Mat> llt(S);
    sol.P[k] = llt.solve(B[k].transpose() * Z * A[k]);
    sol.a[k] = llt.solve(B[k].transpose() * zeta + r[k]);

    const Vec beta = -B[k] * sol.a[k];
    zeta = l[k] + A[k].transpose() * (zeta + Z * beta);
    Z = Q[k] + A[k].transpose() * Z * A[k] - sol.P[k].transpose() * S * sol.P[k];
    Z = 0.5 * (Z + Z.transpose()).eval();
  }
  return sol;
}

}  // namespace oracles
