#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dtnlab/bvp.hpp"

namespace dtnlab {

/// Pivot space H over the boundary dofs with trace j = trace0 and
/// kappa = trace0 restricted to BD(G) (in BD(G) coordinates).
struct PivotSpace {
  WeightedSpace space;
  Mat kappa;    // dim H x dim BD(G)
  SpMat trace;  // j on all of H0

  Eigen::Index dim() const { return space.dim(); }
  /// kappa^* in coordinates: BD(G) coords <- H.
  Mat kappa_adjoint() const;
};

/// H = boundary dofs weighted by the discrete boundary measure.
PivotSpace default_pivot(const DualPair& p, const BoundarySpace& bdg, const TolerancePolicy& tol = {});
/// Same trace with custom positive boundary weights.
PivotSpace custom_pivot(const DualPair& p, const BoundarySpace& bdg, const RVec& weights,
                        const TolerancePolicy& tol = {});

/// kappa^* psi as an ambient BD(G) vector.
Vec kappa_adjoint_lift(const PivotSpace& piv, const BoundarySpace& bdg, const Vec& psi);

struct DtnBd {
  Mat lambda;          // BD(D) coords x BD(G) coords, definitional route
  Mat lambda_block;    // same map through the Dirichlet block system
  double route_agreement = 0.0;
};

DtnBd dtn_bd(const DualPair& p, const BoundarySpaces& bs, const CoefficientOp& a, const CoefficientOp& m,
             SolveOptions opt = {});

/// Inverse through the constrained Neumann block (BD(G) coords x BD(D) coords).
Mat ntd_bd(const DualPair& p, const BoundarySpaces& bs, const CoefficientOp& a, const CoefficientOp& m,
           SolveOptions opt = {});

struct DtnOperator {
  Mat lambda_h;
  double vertex = 0.0;      // min eigenvalue of the Hermitian part in H
  double half_angle = 0.0;  // sampled, relative to the vertex
  bool symmetric = false;
  double hermitian_defect = 0.0;
};

/// Steklov matrix on H: Lambda_H = W_H^{-1} R^H Bf E with E the harmonic lift
/// of the trace lift R.
Mat pivot_matrix(const DualPair& p, const CoefficientOp& a, const CoefficientOp& m, const PivotSpace& piv,
                 SolveOptions opt = {});

DtnOperator dtn_pivot(const DualPair& p, const CoefficientOp& a, const CoefficientOp& m, const PivotSpace& piv,
                      std::uint64_t seed = 42, SolveOptions opt = {});

struct PivotInverse {
  Mat inverse;
  double roundtrip = 0.0;  // ||Lambda_H Lambda_H^{-1} - I||
};

/// Lambda_H^{-1} psi = kappa pi_BD(G) (m, -D-dot; -G, a^{-1})^{-1} (1; -a^{-1} G) kappa^* psi.
PivotInverse dtn_pivot_inverse(const DualPair& p, const BoundarySpace& bdg, const CoefficientOp& a,
                               const CoefficientOp& m, const PivotSpace& piv, SolveOptions opt = {});

struct SectorConstants {
  double mu_tilde = 0.0;
  double omega = 0.0;
  double c = 0.0;
  double half_angle() const;
};

/// mu_tilde = mu_a / 2, c = ||a|| + ||m||, omega = smallest shift with
/// mu_tilde ||u||_graph^2 <= Re b(u) + omega ||j u||_H^2 on harmonic lifts.
SectorConstants sector_constants(const DualPair& p, const CoefficientOp& a, const CoefficientOp& m,
                                 const PivotSpace& piv, std::optional<double> mu_tilde = std::nullopt,
                                 SolveOptions opt = {});

struct SectorReport {
  std::vector<Scalar> quotients;
  double vertex = 0.0;      // min Re over the samples
  double half_angle = 0.0;  // max angle seen from the reference vertex
  bool contained = true;    // inside the a priori sector, when one is given
  double worst_margin = 0.0;
};

/// Rayleigh quotients (Lambda_H phi, phi)_H / (phi, phi)_H over `samples`
/// seeded random directions plus the Hermitian-part eigenvectors.
SectorReport sector_report(const Mat& lambda_h, const WeightedSpace& h, int samples, std::uint64_t seed,
                           const std::optional<SectorConstants>& sector = std::nullopt);

/// Deterministic standard complex Gaussian matrix (portable across libraries).
Mat seeded_gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed);

struct Correspondence {
  double defect = 0.0;        // ||Lambda u0 - G kappa^* Lambda_H kappa u0||_graph / ||Lambda||
  double coordinates = 0.0;   // same identity projected onto BD(D)
};

Correspondence dtn_correspondence(const DualPair& p, const BoundarySpaces& bs, const Mat& lambda_bd,
                                  const Mat& lambda_h, const PivotSpace& piv);

}  // namespace dtnlab
