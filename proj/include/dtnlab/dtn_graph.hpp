#pragma once

#include "dtnlab/dtn.hpp"

namespace dtnlab {

/// Rank decisions near an interior eigenvalue use a looser 1e-8 threshold.
inline TolerancePolicy graph_tolerance() {
  TolerancePolicy t;
  t.rank_rel_tol = 1e-8;
  return t;
}

/// Subspace of a product space X x Y given in coordinates, with its domain
/// and multi-valued part.
struct LinearGraph {
  Eigen::Index left_dim = 0;
  Eigen::Index right_dim = 0;
  Mat basis;          // (left_dim + right_dim) x dim, orthonormal columns
  Subspace dom;       // in X coordinates
  Subspace ran;       // in Y coordinates
  Subspace mul;       // {y : (0, y) in graph}
  double mul_crosscheck = 0.0;  // angle between the two eliminations
  double rank_scale = 0.0;      // absolute scale used for rank decisions
  Eigen::Index dim_weak_kernel = 0;      // dim K
  Eigen::Index dim_interior_kernel = 0;  // dim ker(T-ring)

  Eigen::Index dim() const { return basis.cols(); }
  bool single_valued() const { return mul.dim() == 0; }
  /// Matrix of the graph when it is the graph of an operator on all of X.
  Mat as_operator() const;
};

/// T and T-ring: the form b represented in the graph inner products of H0
/// and of interior0.
struct FormOperators {
  Mat T;
  Mat T_interior;
  double residual = 0.0;           // max |(Tu, v)_graph - b(u, v)| over bases, relative
  double residual_interior = 0.0;
};

FormOperators form_operators(const DualPair& p, const CoefficientOp& a, const CoefficientOp& m);

/// Weak kernel K = {u : b(u, v) = 0 for v in interior0} as columns.
Mat weak_kernel(const DualPair& p, const CoefficientOp& a, const CoefficientOp& m, const TolerancePolicy& tol = graph_tolerance());

/// {(pi_BD(G) u, pi_BD(D) a G u) : u in K} in BD coordinates.
LinearGraph dtn_graph(const DualPair& p, const BoundarySpaces& bs, const CoefficientOp& a, const CoefficientOp& m,
                      const TolerancePolicy& tol = graph_tolerance());

/// {(j u, psi) : u in K, b(u, v) = (psi, j v)_H for all v} on H x H.
LinearGraph graph_pivot(const DualPair& p, const CoefficientOp& a, const CoefficientOp& m, const PivotSpace& piv,
                        const TolerancePolicy& tol = graph_tolerance());

struct DomainReport {
  Eigen::Index ambient_dim = 0;
  Eigen::Index dim_direct = 0;        // route (i): from the graph
  Eigen::Index dim_solvability = 0;   // route (ii): exact solvability
  double route_angle = 0.0;
  bool routes_agree = false;
  Eigen::Index adjoint_kernel_dim = 0;
  Eigen::Index literal_codim = 0;     // codimension predicted by the pairing form
  double literal_defect = 0.0;        // pairing form evaluated on the computed domain
  double sigma_ratio = 0.0;           // smallest / largest singular value of the range map
  double riesz_residual = 0.0;        // Neumann side only
  Eigen::Index codim() const { return ambient_dim - dim_direct; }
};

DomainReport graph_domain_check(const DualPair& p, const BoundarySpaces& bs, const CoefficientOp& a,
                                const CoefficientOp& m, const TolerancePolicy& tol = graph_tolerance());
DomainReport ntd_domain_check(const DualPair& p, const BoundarySpaces& bs, const CoefficientOp& a,
                              const CoefficientOp& m, const TolerancePolicy& tol = graph_tolerance());

struct PivotResolvent {
  Mat resolvent;   // (lambda + Lambda_H)^{-1}
  Mat lambda_h;
  double omega = 0.0;
  double residual = 0.0;
};

/// Resolvent of the pivot graph at lambda > omega; throws
/// GraphNotOperatorError when the graph is multi-valued.
PivotResolvent graph_resolvent(const DualPair& p, const CoefficientOp& a, const CoefficientOp& m,
                               const PivotSpace& piv, double lambda, const TolerancePolicy& tol = graph_tolerance());

/// Subspace spanned by the columns of X. Singular values count as zero below
/// rank_rel_tol * scale, or rank_rel_tol * sigma_max(X) when scale <= 0.
Subspace column_space(const Mat& X, const TolerancePolicy& tol = {}, double scale = 0.0);

/// u -> (b(u, .) on interior0, pi_BD(D) a G u) written between graph-orthonormal
/// coordinates of H0, interior0 and BD(D). Its norm is the common scale for
/// every rank decision of the DtN graph.
Mat solvability_operator(const DualPair& p, const BoundarySpaces& bs, const CoefficientOp& a, const CoefficientOp& m);

}  // namespace dtnlab
