#include "dtnlab/boundary_spaces.hpp"

#include <algorithm>
#include <cmath>

namespace dtnlab {

using Eigen::Index;

SpMat graph_gram(const DualPair& p, Side side) {
  if (side == Side::G) {
    SpMat k = p.h0.gram() + SpMat(p.G.adjoint()) * p.h1.gram() * p.G;
    k.makeCompressed();
    return k;
  }
  SpMat k = p.h1.gram() + SpMat(p.D.adjoint()) * p.h0.gram() * p.D;
  k.makeCompressed();
  return k;
}

Mat BoundarySpace::projector() const { return basis * (basis.adjoint() * graph_gram); }

BoundarySpace bd_space(const DualPair& p, Side side, const TolerancePolicy& tol) {
  BoundarySpace bd;
  bd.side = side;
  bd.graph_gram = graph_gram(p, side);
  bd.interior = side == Side::G ? p.interior0 : p.interior1;
  const SpMat& trace = side == Side::G ? p.trace0 : p.trace1;

  Mat X = Mat(SpMat(trace.adjoint()));
  const SpMat& V = bd.interior;
  if (V.cols() > 0) {
    const SpMat VK = SpMat(V.adjoint()) * bd.graph_gram;
    const SpMat VKV = VK * V;
    Eigen::SimplicialLDLT<SpMat> ldlt(VKV);
    if (ldlt.info() != Eigen::Success) throw NumericalFailure("interior graph Gram is singular");
    for (int pass = 0; pass < 2; ++pass) {
      const Mat c = ldlt.solve(Mat(VK * X));
      X -= V * c;
    }
  }
  try {
    bd.basis = orthonormalize(X, bd.graph_gram, tol);
  } catch (const DegenerateSubspaceError& e) {
    throw NumericalFailure(std::string("boundary space: ") + e.what());
  }
  return bd;
}

Vec project_bd(const BoundarySpace& bd, const Vec& x) {
  if (x.size() != bd.ambient_dim()) throw ContractError("project_bd: vector size mismatch");
  return bd.project(x);
}

BoundarySpaces boundary_spaces(const DualPair& p, const TolerancePolicy& tol) {
  BoundarySpaces bs;
  bs.g = bd_space(p, Side::G, tol);
  bs.d = bd_space(p, Side::D, tol);
  bs.g_dot = bs.d.coords(Mat(p.G * bs.g.basis));
  bs.d_dot = bs.g.coords(Mat(p.D * bs.d.basis));
  return bs;
}

namespace {

double graph_norm(const SpMat& k, const Vec& x) { return std::sqrt(std::max(0.0, x.dot(k * x).real())); }

// max row sum
double inf_norm(const SpMat& m) {
  RVec rows = RVec::Zero(m.rows());
  for (Index k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it) rows(it.row()) += std::abs(it.value());
  return rows.size() ? rows.maxCoeff() : 0.0;
}

}  // namespace

DotResult g_dot(const DualPair& p, const BoundarySpaces& bs, const Vec& u) {
  const Vec gu = p.G * u;
  const Vec val = bs.d.project(gu);
  return {val, graph_norm(bs.d.graph_gram, gu - val)};
}

DotResult d_dot(const DualPair& p, const BoundarySpaces& bs, const Vec& q) {
  const Vec dq = p.D * q;
  const Vec val = bs.g.project(dq);
  return {val, graph_norm(bs.g.graph_gram, dq - val)};
}

Scalar phi_pairing(const DualPair& p, const Vec& q, const Vec& u) {
  return p.h0.inner(p.D * q, u) + p.h1.inner(q, p.G * u);
}

Vec bd_from_trace(const DualPair& p, const BoundarySpace& bdg, const Vec& phi) {
  if (phi.size() != p.b0()) throw ContractError("bd_from_trace: trace data size mismatch");
  const Mat kappa = p.trace0 * bdg.basis;
  return bdg.basis * kappa.partialPivLu().solve(phi);
}

BdDiagnostics bd_diagnostics(const DualPair& p, const BoundarySpaces& bs) {
  BdDiagnostics r;
  r.dim_g = bs.g.dim();
  r.dim_d = bs.d.dim();

  const auto orth = [](const BoundarySpace& bd) {
    const Mat B = bd.basis;
    const SpMat& V = bd.interior;
    if (V.cols() == 0) return 0.0;
    const Mat cross = Mat(SpMat(V.adjoint()) * bd.graph_gram) * B;
    double worst = 0.0;
    for (Index j = 0; j < V.cols(); ++j) {
      const Vec v = V.col(j);
      const double vn = graph_norm(bd.graph_gram, v);
      worst = std::max(worst, cross.row(j).cwiseAbs().maxCoeff() / vn);
    }
    return worst;
  };
  r.orthogonality_g = orth(bs.g);
  r.orthogonality_d = orth(bs.d);
  const auto onorm = [](const BoundarySpace& bd) {
    const Mat I = Mat::Identity(bd.dim(), bd.dim());
    return (bd.basis.adjoint() * (bd.graph_gram * bd.basis) - I).cwiseAbs().maxCoeff();
  };
  r.orthonormality = std::max(onorm(bs.g), onorm(bs.d));

  const Mat& B0 = bs.g.basis;
  const Mat& B1 = bs.d.basis;
  const Mat GB0 = p.G * B0;
  const Mat DGB0 = p.D * GB0;
  const Mat DB1 = p.D * B1;
  const Mat GDB1 = p.G * DB1;
  const SpMat& g0 = p.h0.gram();
  const SpMat& g1 = p.h1.gram();
  // normwise scales for residuals of (I - DG) and (I - GD)
  const double scale_g = inf_norm(g0) * (1.0 + inf_norm(p.D) * inf_norm(p.G));
  const double scale_d = inf_norm(g1) * (1.0 + inf_norm(p.G) * inf_norm(p.D));

  for (Index k = 0; k < B0.cols(); ++k) {
    const Vec rho = B0.col(k) - DGB0.col(k);
    const Vec inner_part = SpMat(p.interior0.adjoint()) * (g0 * rho);
    const double scale = scale_g * B0.col(k).cwiseAbs().maxCoeff();
    if (inner_part.size()) r.relaxed_lbd_g = std::max(r.relaxed_lbd_g, inner_part.cwiseAbs().maxCoeff() / scale);
    r.strict_lbd = std::max(r.strict_lbd, p.h0.norm(rho));
    r.corollary = std::max(r.corollary, graph_norm(bs.d.graph_gram, GB0.col(k) - bs.d.project(GB0.col(k))));

    // (Gu, r) + (DGu, Dr) = -(rho_u, Dr) for every r in interior1
    if (p.interior1.cols() > 0) {
      const Mat R = Mat(p.interior1);
      const Mat DR = p.D * p.interior1;
      const Vec lhs = R.adjoint() * (g1 * GB0.col(k)) + DR.adjoint() * (g0 * DGB0.col(k));
      const Vec rhs = -(DR.adjoint() * (g0 * rho));
      const double s = std::max({(R.adjoint() * (g1 * GB0.col(k))).cwiseAbs().maxCoeff(),
                                 (DR.adjoint() * (g0 * DGB0.col(k))).cwiseAbs().maxCoeff(), 1e-300});
      r.flux_identity = std::max(r.flux_identity, (lhs - rhs).cwiseAbs().maxCoeff() / s);
    }
  }
  for (Index k = 0; k < B1.cols(); ++k) {
    const Vec rho = B1.col(k) - GDB1.col(k);
    if (p.interior1.cols() == 0) break;
    const Vec inner_part = SpMat(p.interior1.adjoint()) * (g1 * rho);
    const double scale = scale_d * B1.col(k).cwiseAbs().maxCoeff();
    r.relaxed_lbd_d = std::max(r.relaxed_lbd_d, inner_part.cwiseAbs().maxCoeff() / scale);
  }

  const Mat prod = bs.d_dot * bs.g_dot;
  r.unitarity = singular_values(prod - Mat::Identity(prod.rows(), prod.cols()))(0);

  for (Index i = 0; i < B1.cols(); ++i)
    for (Index k = 0; k < B0.cols(); ++k) {
      const Scalar phi = phi_pairing(p, B1.col(i), B0.col(k));
      // (q_i, G-dot u_k) in BD(D) coordinates
      const Scalar pair = std::conj(bs.g_dot(i, k));
      r.phi_vs_gdot = std::max(r.phi_vs_gdot, std::abs(phi - pair));
    }
  return r;
}

}  // namespace dtnlab
