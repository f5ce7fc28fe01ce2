#pragma once

#include <memory>

#include "dtnlab/boundary_spaces.hpp"
#include "dtnlab/coefficient.hpp"

namespace dtnlab {

struct SolveOptions {
  /// Reject non-coercive coefficients up front. With false the system is
  /// factored anyway and a NearSingularError is raised when its smallest
  /// singular value drops below near_singular_tol * largest.
  bool require_coercive = true;
  double near_singular_tol = 1e-10;
};

struct BvpSolution {
  Vec u;                      // H0
  Vec q;                      // a G u in H1
  double interior_residual = 0.0;
  Vec boundary_data_echo;     // trace0 u (Dirichlet) or trace1 q (Neumann)
  double neumann_trace_defect = 0.0;
  bool energy_bound_ok = true;
};

/// b(u, v) = (a G u, G v)_H1 + (m u, v)_H0 as the matrix Bf with b(u, v) = v^H Bf u.
SpMat form_matrix(const DualPair& p, const CoefficientOp& a, const CoefficientOp& m);

/// Factored Dirichlet problem: u - u0 in interior0, b(u, v) = 0 for interior v.
class DirichletSolver {
 public:
  DirichletSolver(const DualPair& p, const CoefficientOp& a, const CoefficientOp& m, SolveOptions opt = {});

  BvpSolution solve(const Vec& u0) const;
  /// Columnwise u = u0 - V (V^H Bf V)^{-1} V^H Bf u0.
  Mat lift(const Mat& u0) const;
  /// u - u0 in interior0 and b(u, v) = (f, v)_H0 for interior v.
  Vec solve_with_source(const Vec& u0, const Vec& f) const;
  const SpMat& form() const { return form_; }

 private:
  std::shared_ptr<const DualPair> p_;
  CoefficientOp a_, m_;
  SpMat form_;
  std::shared_ptr<Eigen::SparseLU<SpMat>> lu_;
};

/// Factored weak Neumann problem b(u, v) = (Dq0, v)_H0 + (q0, Gv)_H1 for all v.
class NeumannSolver {
 public:
  NeumannSolver(const DualPair& p, const CoefficientOp& a, const CoefficientOp& m, SolveOptions opt = {});

  BvpSolution solve(const Vec& q0) const;
  /// Bf^{-1} rhs, columnwise.
  Mat solve_form(const Mat& rhs) const;
  const SpMat& form() const { return form_; }

 private:
  std::shared_ptr<const DualPair> p_;
  CoefficientOp a_, m_;
  SpMat form_;
  std::shared_ptr<Eigen::SparseLU<SpMat>> lu_;
};

BvpSolution solve_dirichlet(const DualPair& p, const CoefficientOp& a, const CoefficientOp& m, const Vec& u0,
                            SolveOptions opt = {});
BvpSolution solve_neumann(const DualPair& p, const CoefficientOp& a, const CoefficientOp& m, const Vec& q0,
                          SolveOptions opt = {});

enum class BlockVariant { Dirichlet, Neumann };

struct BlockSolution {
  Vec u;  // H0
  Vec q;  // H1
  double residual = 0.0;
};

/// First-order systems
///   Dirichlet: (m, -D; -G-dot, a^{-1}) with u restricted to interior0 and the
///              first row tested on interior0;
///   Neumann:   (m, -D-dot; -G, a^{-1}) with D-dot = -G^dagger on all of H1.
/// Factored block system for repeated right-hand sides (columns of F0, F1).
class BlockSolver {
 public:
  BlockSolver(const DualPair& p, const CoefficientOp& a, const CoefficientOp& m, BlockVariant variant,
              SolveOptions opt = {});

  /// Returns (U; Q) stacked as an (n0 + n1) x k matrix, plus the worst
  /// relative residual through residual.
  Mat solve(const Mat& f0, const Mat& f1, double* residual = nullptr) const;

 private:
  std::shared_ptr<const DualPair> p_;
  BlockVariant variant_;
  SpMat A_;
  std::shared_ptr<Eigen::SparseLU<SpMat>> lu_;
};

BlockSolution solve_block(const DualPair& p, const CoefficientOp& a, const CoefficientOp& m, const Vec& f0,
                          const Vec& f1, BlockVariant variant, SolveOptions opt = {});

struct ResolventBound {
  double norm = 0.0;   // ||(M + A)^{-1}|| as a map H -> dom(A)
  double bound = 0.0;  // (1 + lambda + ||M||) / lambda
  double lambda = 0.0;
  double m_norm = 0.0;
};

/// Lemma-type bound for M + A with A = (0, G^dagger; -G, 0) skew-adjoint in
/// H0 x H1 and M a dense operator on H0 x H1 with coercive Hermitian part.
ResolventBound block_resolvent_bound(const DualPair& p, const Mat& M);

/// Sparse factorization with a near-singularity guard.
std::shared_ptr<Eigen::SparseLU<SpMat>> factor_checked(const SpMat& A, bool check, double tol,
                                                       const char* what);

}  // namespace dtnlab
