#include "dtnlab/dtn_graph.hpp"

#include <algorithm>
#include <cmath>

namespace dtnlab {

using Eigen::Index;

Subspace column_space(const Mat& X, const TolerancePolicy& tol, double scale) {
  if (X.cols() == 0 || X.rows() == 0) return {Mat(X.rows(), 0)};
  Eigen::BDCSVD<Mat> svd(X, Eigen::ComputeThinU);
  const RVec& s = svd.singularValues();
  const double ref = scale > 0.0 ? scale : s(0);
  Index r = 0;
  if (s(0) > 0.0)
    for (Index i = 0; i < s.size(); ++i)
      if (s(i) > tol.rank_rel_tol * ref) ++r;
  Mat U = svd.matrixU().leftCols(r);
  // reproducible orientation
  for (Index j = 0; j < U.cols(); ++j) {
    Index i0 = 0;
    U.col(j).cwiseAbs().maxCoeff(&i0);
    U.col(j) *= std::conj(U(i0, j)) / std::abs(U(i0, j));
  }
  return {U};
}

namespace {

const SpMat& euclid(Index n) {
  thread_local SpMat I;
  if (I.rows() != n) I = sparse_identity(n);
  return I;
}

double angle_between(const Subspace& a, const Subspace& b) {
  if (a.dim() != b.dim()) return kPi / 2;
  if (a.dim() == 0) return 0.0;
  return subspace_distance(a, b, euclid(a.ambient_dim()));
}

Subspace orth_complement(const Subspace& s, Index n, const TolerancePolicy& tol) {
  if (s.dim() == 0) return {Mat::Identity(n, n)};
  return numeric_kernel(s.basis.adjoint(), tol);
}

Subspace kernel_or_empty(const Mat& A, const TolerancePolicy& tol) {
  if (A.cols() == 0) return {Mat(0, 0)};
  return numeric_kernel(A, tol);
}

// Kernel with singular values measured against an absolute scale.
Subspace kernel_scaled(const Mat& A, const TolerancePolicy& tol, double scale) {
  if (A.cols() == 0) return {Mat(0, 0)};
  if (scale <= 0.0 || A.rows() == 0) return numeric_kernel(A, tol);
  Eigen::BDCSVD<Mat> svd(A, Eigen::ComputeFullV);
  const RVec& s = svd.singularValues();
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > tol.rank_rel_tol * scale) ++r;
  return {svd.matrixV().rightCols(A.cols() - r)};
}

// Graph spanned by the columns of [X; Y], with both eliminations of mul.
LinearGraph build_graph(const Mat& X, const Mat& Y, const TolerancePolicy& tol, double scale) {
  LinearGraph g;
  g.left_dim = X.rows();
  g.right_dim = Y.rows();
  g.rank_scale = scale;
  Mat Z(X.rows() + Y.rows(), X.cols());
  Z << X, Y;
  g.basis = column_space(Z, tol, scale).basis;
  g.dom = column_space(X, tol, scale);
  g.ran = column_space(Y, tol, scale);

  const Subspace kx = kernel_scaled(X, tol, scale);
  const Subspace mul1 = kx.dim() ? column_space(Y * kx.basis, tol, scale) : Subspace{Mat(Y.rows(), 0)};
  const Mat gx = g.basis.topRows(g.left_dim);
  const Mat gy = g.basis.bottomRows(g.right_dim);
  const Subspace kg = kernel_or_empty(gx, tol);
  const Subspace mul2 = kg.dim() ? column_space(gy * kg.basis, tol) : Subspace{Mat(Y.rows(), 0)};
  g.mul = mul2;
  g.mul_crosscheck = angle_between(mul1, mul2);
  return g;
}

}  // namespace

Mat LinearGraph::as_operator() const {
  if (!single_valued()) throw GraphNotOperatorError("graph has a nontrivial multi-valued part");
  if (dim() != left_dim || dom.dim() != left_dim) throw GraphNotOperatorError("graph is not defined on the whole space");
  const Mat gx = basis.topRows(left_dim);
  const Mat gy = basis.bottomRows(right_dim);
  return gy * gx.partialPivLu().inverse();
}

FormOperators form_operators(const DualPair& p, const CoefficientOp& a, const CoefficientOp& m) {
  const SpMat bf = form_matrix(p, a, m);
  const SpMat K0 = graph_gram(p, Side::G);
  const SpMat& V = p.interior0;
  const SpMat Ki = SpMat(V.adjoint()) * K0 * V;
  const SpMat Bi = SpMat(V.adjoint()) * bf * V;
  FormOperators f;
  Eigen::SimplicialLDLT<SpMat> l0(K0);
  f.T = l0.solve(Mat(bf));
  const double s0 = Mat(bf).cwiseAbs().maxCoeff();
  f.residual = (Mat(K0 * f.T) - Mat(bf)).cwiseAbs().maxCoeff() / s0;
  if (V.cols() > 0) {
    Eigen::SimplicialLDLT<SpMat> li(Ki);
    f.T_interior = li.solve(Mat(Bi));
    const double si = Mat(Bi).cwiseAbs().maxCoeff();
    f.residual_interior = (Mat(Ki * f.T_interior) - Mat(Bi)).cwiseAbs().maxCoeff() / si;
  }
  return f;
}

Mat weak_kernel(const DualPair& p, const CoefficientOp& a, const CoefficientOp& m, const TolerancePolicy& tol) {
  const SpMat bf = form_matrix(p, a, m);
  const Mat A = Mat(SpMat(p.interior0.adjoint()) * bf);
  const Mat K = numeric_kernel(A, tol).basis;
  if (K.cols() == 0) return K;
  return orthonormalize(K, graph_gram(p, Side::G));
}

namespace {

Index interior_kernel_dim(const DualPair& p, const SpMat& bf, const TolerancePolicy& tol) {
  if (p.interior0.cols() == 0) return 0;
  const Mat Ai = Mat(SpMat(p.interior0.adjoint()) * bf * p.interior0);
  return numeric_kernel(Ai, tol).dim();
}

}  // namespace

Mat solvability_operator(const DualPair& p, const BoundarySpaces& bs, const CoefficientOp& a, const CoefficientOp& m) {
  const SpMat bf = form_matrix(p, a, m);
  const SpMat& V = p.interior0;
  const Index ni = V.cols();
  const SpMat& K0 = bs.g.graph_gram;
  const GramFactor F0(K0);
  const Mat F0m = F0.apply(Mat::Identity(p.n0(), p.n0()));
  const Mat F0inv = F0.solve(F0m.adjoint());
  Mat L(ni + bs.d.dim(), p.n0());
  if (ni > 0) {
    const SpMat Ki = SpMat(V.adjoint()) * K0 * V;
    const GramFactor Fi(Ki);
    const Mat Fim = Fi.apply(Mat::Identity(ni, ni));
    const Mat Fiinv = Fi.solve(Fim.adjoint());
    L.topRows(ni) = Fiinv.adjoint() * Mat(SpMat(V.adjoint()) * bf) * F0inv;
  }
  L.bottomRows(bs.d.dim()) = bs.d.coords(Mat(a.matrix * p.G)) * F0inv;
  return L;
}

LinearGraph dtn_graph(const DualPair& p, const BoundarySpaces& bs, const CoefficientOp& a, const CoefficientOp& m,
                      const TolerancePolicy& tol) {
  if (!a.coercive()) throw ContractError("dtn_graph needs a coercive a");
  const Mat K = weak_kernel(p, a, m, tol);
  const Mat X = bs.g.coords(K);
  const Mat Y = bs.d.coords(Mat(a.matrix * (p.G * K)));
  const double scale = singular_values(solvability_operator(p, bs, a, m))(0);
  LinearGraph g = build_graph(X, Y, tol, scale);
  g.dim_weak_kernel = K.cols();
  g.dim_interior_kernel = interior_kernel_dim(p, form_matrix(p, a, m), tol);
  return g;
}

LinearGraph graph_pivot(const DualPair& p, const CoefficientOp& a, const CoefficientOp& m, const PivotSpace& piv,
                        const TolerancePolicy& tol) {
  if (!a.coercive()) throw ContractError("graph_pivot needs a coercive a");
  const SpMat bf = form_matrix(p, a, m);
  const Mat K = weak_kernel(p, a, m, tol);
  const Mat T(piv.trace);
  const Mat R = T.adjoint() * (T * T.adjoint()).llt().solve(Mat::Identity(T.rows(), T.rows()));
  const Mat X = T * K;
  const Mat Y = piv.space.solve(R.adjoint() * (bf * K));
  LinearGraph g = build_graph(X, Y, tol, 0.0);
  g.dim_weak_kernel = K.cols();
  g.dim_interior_kernel = interior_kernel_dim(p, bf, tol);
  return g;
}

DomainReport graph_domain_check(const DualPair& p, const BoundarySpaces& bs, const CoefficientOp& a,
                                const CoefficientOp& m, const TolerancePolicy& tol) {
  DomainReport r;
  const LinearGraph g = dtn_graph(p, bs, a, m, tol);
  r.ambient_dim = bs.g.dim();
  r.dim_direct = g.dom.dim();

  const SpMat bf = form_matrix(p, a, m);
  const SpMat& V = p.interior0;
  const Mat Ai = Mat(SpMat(V.adjoint()) * bf * V);
  const Subspace adj = kernel_or_empty(Mat(Ai.adjoint()), tol);
  r.adjoint_kernel_dim = adj.dim();

  const Mat& B0 = bs.g.basis;
  Subspace dom2;
  Mat vk;  // kernel vectors of the adjoint interior problem in H0
  if (adj.dim() == 0) {
    dom2 = {Mat::Identity(r.ambient_dim, r.ambient_dim)};
  } else {
    vk = V * adj.basis;
    const Mat C = vk.adjoint() * (bf * B0);  // b(B0 e_j, v_k)
    dom2 = numeric_kernel(C, tol);
  }
  r.dim_solvability = dom2.dim();
  r.route_angle = angle_between(g.dom, dom2);
  r.routes_agree = r.dim_direct == r.dim_solvability && r.route_angle <= 1e-9;

  // literal pairing (G u0, pi_BD(D) a^* G v)_graph over v in the adjoint kernel
  if (adj.dim() > 0) {
    const SpMat astar = a.adjoint(p.h1);
    const Mat q = bs.d.basis * bs.d.coords(Mat(astar * (p.G * vk)));
    const SpMat& K1 = bs.d.graph_gram;
    const Mat Gu = p.G * (B0 * dom2.basis);
    const Mat pairing = q.adjoint() * (K1 * Gu);
    for (Index i = 0; i < pairing.rows(); ++i)
      for (Index j = 0; j < pairing.cols(); ++j) {
        const double nq = std::sqrt(std::abs(q.col(i).dot(K1 * q.col(i))));
        const double ng = std::sqrt(std::abs(Gu.col(j).dot(K1 * Gu.col(j))));
        r.literal_defect = std::max(r.literal_defect, std::abs(pairing(i, j)) / (nq * ng));
      }
    const Mat conds = q.adjoint() * (K1 * (p.G * B0));
    r.literal_codim = numeric_rank(conds, tol);
  }
  const Mat X = bs.g.coords(weak_kernel(p, a, m, tol));
  if (X.cols() > 0) {
    const RVec s = singular_values(X);
    r.sigma_ratio = s(s.size() - 1) / s(0);
  }
  return r;
}

DomainReport ntd_domain_check(const DualPair& p, const BoundarySpaces& bs, const CoefficientOp& a,
                              const CoefficientOp& m, const TolerancePolicy& tol) {
  DomainReport r;
  const LinearGraph g = dtn_graph(p, bs, a, m, tol);
  r.ambient_dim = bs.d.dim();
  r.dim_direct = g.ran.dim();

  const SpMat bf = form_matrix(p, a, m);
  const SpMat& K0 = bs.g.graph_gram;
  // q0 is reachable iff (0, q0) is orthogonal to the kernel of the adjoint
  const Mat L = solvability_operator(p, bs, a, m);
  const Subspace lk = numeric_kernel(Mat(L.adjoint()), tol);
  Subspace dom2;
  if (lk.dim() == 0) {
    dom2 = {Mat::Identity(r.ambient_dim, r.ambient_dim)};
  } else {
    const Subspace w = column_space(lk.basis.bottomRows(bs.d.dim()), tol);
    dom2 = orth_complement(w, r.ambient_dim, tol);
  }
  r.dim_solvability = dom2.dim();
  r.route_angle = angle_between(g.ran, dom2);
  r.routes_agree = r.dim_direct == r.dim_solvability && r.route_angle <= 1e-9;

  // pairing-form characterization: (D q0, pi_BD(G) v)_graph = 0 for v in ker(T^*)
  const Subspace kt = numeric_kernel(Mat(Mat(bf).adjoint()), tol);
  r.adjoint_kernel_dim = kt.dim();
  if (kt.dim() > 0) {
    const Mat pv = bs.g.basis * bs.g.coords(kt.basis);
    const Mat Dq = p.D * bs.d.basis;
    const Mat conds = pv.adjoint() * (K0 * Dq);
    r.literal_codim = numeric_rank(conds, tol);
    if (dom2.dim() > 0) {
      const Mat Dd = Dq * dom2.basis;
      const Mat pairing = pv.adjoint() * (K0 * Dd);
      for (Index i = 0; i < pairing.rows(); ++i)
        for (Index j = 0; j < pairing.cols(); ++j) {
          const double n1 = std::sqrt(std::abs(pv.col(i).dot(K0 * pv.col(i))));
          const double n2 = std::sqrt(std::abs(Dd.col(j).dot(K0 * Dd.col(j))));
          r.literal_defect = std::max(r.literal_defect, std::abs(pairing(i, j)) / (n1 * n2));
        }
    }
  }
  const Mat Y = bs.d.coords(Mat(a.matrix * (p.G * weak_kernel(p, a, m, tol))));
  if (Y.cols() > 0) {
    const RVec s = singular_values(Y);
    r.sigma_ratio = s(s.size() - 1) / s(0);
  }

  // Riesz representative f0 = pi_BD(G) D q0 of v -> (D q0, pi_BD(G) v)_graph
  const Mat Dq = p.D * bs.d.basis;
  const Mat f0 = bs.g.basis * bs.g.coords(Dq);
  const Mat P = bs.g.projector();
  const Mat lhs = Mat(K0 * f0);                // (f0, e_i)_graph
  const Mat rhs = P.adjoint() * (K0 * Dq);     // (D q0, P e_i)_graph
  const double scale = std::max(Mat(K0 * Dq).cwiseAbs().maxCoeff(), 1e-300);
  r.riesz_residual = (lhs - rhs).cwiseAbs().maxCoeff() / scale;
  return r;
}

PivotResolvent graph_resolvent(const DualPair& p, const CoefficientOp& a, const CoefficientOp& m,
                               const PivotSpace& piv, double lambda, const TolerancePolicy& tol) {
  const LinearGraph g = graph_pivot(p, a, m, piv, tol);
  if (!g.single_valued()) throw GraphNotOperatorError("Lambda_H is multi-valued; no resolvent");
  if (g.dim_interior_kernel != 0) throw GraphNotOperatorError("interior problem has a kernel");
  PivotResolvent r;
  r.lambda_h = g.as_operator();
  SolveOptions opt;
  opt.require_coercive = false;
  r.omega = sector_constants(p, a, m, piv, std::nullopt, opt).omega;
  if (!(lambda > r.omega)) throw ContractError("resolvent requested at lambda <= omega");
  const Index n = r.lambda_h.rows();
  const Mat A = lambda * Mat::Identity(n, n) + r.lambda_h;
  r.resolvent = A.partialPivLu().inverse();
  r.residual = singular_values(A * r.resolvent - Mat::Identity(n, n))(0);
  return r;
}

}  // namespace dtnlab
