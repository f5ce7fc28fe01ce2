#pragma once

// Independent reference computations used by the tests. Everything here is
// written from the mathematical definitions with plain dense linear algebra
// and shares no code with the library.

#include <cmath>
#include <complex>
#include <functional>

#include <Eigen/Dense>

namespace oracle {

using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

constexpr double pi = 3.14159265358979323846;

/// Dense interval pair with n interior nodes.
struct Interval {
  int n = 0;
  double h = 0.0;
  RMat g0, g1, G, D, T0, T1, beta;
};

inline Interval interval(int n) {
  Interval p;
  p.n = n;
  p.h = 1.0 / (n + 1);
  const int N0 = n + 2, N1 = n + 1;
  p.g0 = RMat::Identity(N0, N0) * p.h;
  p.g0(0, 0) = p.g0(N0 - 1, N0 - 1) = 0.5 * p.h;
  p.g1 = RMat::Identity(N1, N1) * p.h;
  p.G = RMat::Zero(N1, N0);
  for (int i = 0; i < N1; ++i) {
    p.G(i, i) = -1.0 / p.h;
    p.G(i, i + 1) = 1.0 / p.h;
  }
  p.T0 = RMat::Zero(2, N0);
  p.T0(0, 0) = 1.0;
  p.T0(1, N0 - 1) = 1.0;
  p.T1 = RMat::Zero(2, N1);
  if (N1 == 1) {
    p.T1(0, 0) = p.T1(1, 0) = 1.0;
  } else {
    p.T1(0, 0) = 1.5;
    p.T1(0, 1) = -0.5;
    p.T1(1, N1 - 1) = 1.5;
    p.T1(1, N1 - 2) = -0.5;
  }
  p.beta = RMat::Zero(2, 2);
  p.beta(0, 0) = -1.0;
  p.beta(1, 1) = 1.0;
  p.D = p.g0.inverse() * (p.T0.transpose() * p.beta * p.T1 - p.G.transpose() * p.g1);
  return p;
}

/// Steklov matrix of -(a u')' + m u on (0, 1) by static condensation of the
/// dense stiffness matrix; a sampled at midpoints, m at nodes.
inline RMat steklov(int n, const std::function<double(double)>& a, const std::function<double(double)>& m) {
  const Interval p = interval(n);
  const int N0 = n + 2;
  RMat A = RMat::Zero(n + 1, n + 1);
  for (int i = 0; i <= n; ++i) A(i, i) = a((i + 0.5) * p.h);
  RMat M = RMat::Zero(N0, N0);
  for (int i = 0; i < N0; ++i) M(i, i) = m(i * p.h);
  const RMat K = p.G.transpose() * p.g1 * A * p.G + p.g0 * M;
  const RMat Kii = K.block(1, 1, n, n);
  RMat Kib(n, 2), Kbb(2, 2);
  Kib.col(0) = K.block(1, 0, n, 1);
  Kib.col(1) = K.block(1, N0 - 1, n, 1);
  Kbb << K(0, 0), K(0, N0 - 1), K(N0 - 1, 0), K(N0 - 1, N0 - 1);
  return Kbb - Kib.transpose() * Kii.ldlt().solve(Kib);
}

/// [[coth 1, -csch 1], [-csch 1, coth 1]]: DtN of u'' = u on (0, 1).
inline RMat analytic_dtn_unit() {
  const double c = std::cosh(1.0) / std::sinh(1.0), s = 1.0 / std::sinh(1.0);
  RMat m(2, 2);
  m << c, -s, -s, c;
  return m;
}

/// Adaptive Simpson quadrature on [lo, hi].
inline double simpson(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-13) {
  const std::function<double(double, double, double, double, double, double, int)> rec =
      [&](double a, double b, double fa, double fm, double fb, double whole, int depth) -> double {
    const double m = 0.5 * (a + b), lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) return left + right + (left + right - whole) / 15.0;
    return rec(a, m, fa, flm, fm, left, depth - 1) + rec(m, b, fm, frm, fb, right, depth - 1);
  };
  const double fa = f(lo), fb = f(hi), fm = f(0.5 * (lo + hi));
  return rec(lo, hi, fa, fm, fb, (hi - lo) / 6.0 * (fa + 4.0 * fm + fb), 40);
}

/// 1 / integral of 1/a over [0, 1].
inline double harmonic_mean(const std::function<double(double)>& a) {
  return 1.0 / simpson([&](double y) { return 1.0 / a(y); }, 0.0, 1.0);
}

/// k-th Dirichlet eigenvalue of the 3-point Laplacian with meshwidth h.
inline double discrete_dirichlet_eigenvalue(int k, double h) {
  const double s = std::sin(k * pi * h / 2.0);
  return 4.0 / (h * h) * s * s;
}

/// Smallest nonzero eigenvalue of G^T g1 G against g0 by dense generalized
/// eigensolve; kernel = constants.
inline double neumann_gap(const RMat& G, const RMat& g0, const RMat& g1) {
  Eigen::GeneralizedSelfAdjointEigenSolver<RMat> es(G.transpose() * g1 * G, g0);
  return es.eigenvalues()(1);
}

/// Sines of the principal angles between column spans (Euclidean).
inline double max_angle_sine(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B) {
  const Eigen::MatrixXcd Qa = A.householderQr().householderQ() * Eigen::MatrixXcd::Identity(A.rows(), A.cols());
  const Eigen::MatrixXcd Qb = B.householderQr().householderQ() * Eigen::MatrixXcd::Identity(B.rows(), B.cols());
  const Eigen::MatrixXcd R = Qa - Qb * (Qb.adjoint() * Qa);
  return R.cols() ? Eigen::JacobiSVD<Eigen::MatrixXcd>(R).singularValues()(0) : 0.0;
}

}  // namespace oracle
