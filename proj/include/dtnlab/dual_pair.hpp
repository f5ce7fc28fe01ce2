#pragma once

#include <string>
#include <vector>

#include "dtnlab/numeric.hpp"

namespace dtnlab {

/// Discrete dual pair (G, D) between H0 (nodes) and H1 (faces) with interior
/// subspaces and trace maps obeying
///   G^H gram1 + gram0 D = trace0^H beta trace1.
/// Interior bases are sparse column sets; everything is immutable once built.
struct DualPair {
  std::string kind;  // "interval" or "rectangle"
  Eigen::Index nx = 0;
  Eigen::Index ny = 0;
  double meshwidth = 0.0;

  WeightedSpace h0;
  WeightedSpace h1;
  SpMat G;          // h1 x h0
  SpMat D;          // h0 x h1
  SpMat interior0;  // h0 x dim(dom G-dot)
  SpMat interior1;  // h1 x dim(dom D-dot)
  SpMat trace0;     // B0 x h0
  SpMat trace1;     // B1 x h1
  SpMat beta;       // B0 x B1

  RMat coords0;                    // dof coordinates (x, y) of H0
  RMat coords1;                    // face midpoints of H1
  std::vector<int> face_family;    // per H1 dof: 0 = x-faces, 1 = y-faces
  RVec boundary_weights;           // discrete boundary measure per trace0 row
  std::vector<Eigen::Index> boundary_nodes;  // H0 index of each trace0 row

  Eigen::Index n0() const { return h0.dim(); }
  Eigen::Index n1() const { return h1.dim(); }
  Eigen::Index b0() const { return trace0.rows(); }
  Eigen::Index b1() const { return trace1.rows(); }
};

DualPair build_interval_pair(Eigen::Index n_interior);
DualPair build_rectangle_pair(Eigen::Index nx, Eigen::Index ny);

struct CheckResult {
  std::string name;
  double residual = 0.0;
  double tol = 0.0;
  bool pass = false;
};

struct PairReport {
  std::vector<CheckResult> checks;
  bool pass() const;
  const CheckResult& at(const std::string& name) const;
};

/// Residuals of the pair axioms: Gram positivity, boundary-form
/// factorization, kernel identifications, trace surjectivity and the skew
/// pairing on interior arguments.
PairReport validate_pair(const DualPair& p, const TolerancePolicy& tol = {});

/// G^H gram1 + gram0 D, the boundary form.
SpMat boundary_form(const DualPair& p);

}  // namespace dtnlab
