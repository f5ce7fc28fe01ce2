#pragma once

#include "dtnlab/dual_pair.hpp"

namespace dtnlab {

enum class Side { G, D };

/// BD(G) or BD(D): the graph-orthocomplement of the interior subspace inside
/// H0 (resp. H1), with a graph-orthonormal basis.
struct BoundarySpace {
  Side side = Side::G;
  Mat basis;        // ambient x dim, basis^H graph_gram basis = I
  SpMat graph_gram;
  SpMat interior;

  Eigen::Index dim() const { return basis.cols(); }
  Eigen::Index ambient_dim() const { return basis.rows(); }
  /// Coordinates of the graph-orthogonal projection of x.
  Vec coords(const Vec& x) const { return basis.adjoint() * (graph_gram * x); }
  Mat coords(const Mat& x) const { return basis.adjoint() * (graph_gram * x); }
  Vec project(const Vec& x) const { return basis * coords(x); }
  /// Dense projector; intended for small ambient dimensions.
  Mat projector() const;
};

/// gram0 + G^H gram1 G (side G) or gram1 + D^H gram0 D (side D).
SpMat graph_gram(const DualPair& p, Side side);

BoundarySpace bd_space(const DualPair& p, Side side, const TolerancePolicy& tol = {});

Vec project_bd(const BoundarySpace& bd, const Vec& x);

/// Boundary space pair plus the coordinate matrices of G-dot and D-dot.
struct BoundarySpaces {
  BoundarySpace g;
  BoundarySpace d;
  Mat g_dot;  // BD(G) coords -> BD(D) coords: pi_BD(D) G
  Mat d_dot;  // BD(D) coords -> BD(G) coords: pi_BD(G) D
};

BoundarySpaces boundary_spaces(const DualPair& p, const TolerancePolicy& tol = {});

struct DotResult {
  Vec value;                 // ambient vector in the target boundary space
  double projection_defect;  // graph norm of the part removed by the projection
};

/// pi_BD(D) G u for u in BD(G).
DotResult g_dot(const DualPair& p, const BoundarySpaces& bs, const Vec& u);
/// pi_BD(G) D q for q in BD(D).
DotResult d_dot(const DualPair& p, const BoundarySpaces& bs, const Vec& q);

/// (Dq, u)_H0 + (q, Gu)_H1.
Scalar phi_pairing(const DualPair& p, const Vec& q, const Vec& u);

/// The element of BD(G) with Dirichlet trace phi.
Vec bd_from_trace(const DualPair& p, const BoundarySpace& bdg, const Vec& phi);

struct BdDiagnostics {
  // exact identities
  double orthogonality_g = 0.0;   // max cos angle between BD(G) and interior0
  double orthogonality_d = 0.0;
  double orthonormality = 0.0;    // basis^H K basis - I
  double relaxed_lbd_g = 0.0;     // interior part of (I - DG)u, relative
  double relaxed_lbd_d = 0.0;
  double flux_identity = 0.0;     // (Gu, r) + (DGu, Dr) + (rho_u, Dr), relative
  Eigen::Index dim_g = 0;
  Eigen::Index dim_d = 0;
  // asymptotic defects
  double strict_lbd = 0.0;        // max ||(I - DG)u||_H0 over the basis
  double unitarity = 0.0;         // ||D-dot G-dot - I||_2
  double corollary = 0.0;         // max ||Gu - pi_BD(D) Gu||_graph
  double phi_vs_gdot = 0.0;       // max |Phi(q)(u) - (q, G-dot u)|
};

BdDiagnostics bd_diagnostics(const DualPair& p, const BoundarySpaces& bs);

}  // namespace dtnlab
