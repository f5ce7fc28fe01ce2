#include "dtnlab/bvp.hpp"

#include <algorithm>
#include <cmath>

namespace dtnlab {

using Eigen::Index;

namespace {

double inf_norm(const SpMat& m) {
  RVec rows = RVec::Zero(m.rows());
  for (Index k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it) rows(it.row()) += std::abs(it.value());
  return rows.size() ? rows.maxCoeff() : 0.0;
}

double max_abs(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

void require(const CoefficientOp& a, const CoefficientOp& m, const SolveOptions& opt) {
  if (!a.coercive()) throw ContractError("coefficient a is not coercive");
  if (opt.require_coercive && !m.coercive()) {
    throw ContractError("coefficient m is not coercive; solve in graph mode instead");
  }
}

bool energy_ok(const DualPair& p, const CoefficientOp& a, const CoefficientOp& m, const SpMat& form, const Vec& u,
               Scalar rhs_pairing) {
  if (!a.coercive() || !m.coercive()) return true;
  const double mu = std::min(*a.coercivity_mu, *m.coercivity_mu);
  const SpMat k = graph_gram(p, Side::G);
  const double graph = u.dot(k * u).real();
  const double re_b = u.dot(form * u).real();
  return mu * graph <= re_b + std::abs(rhs_pairing) + 1e-10 * std::max(1.0, std::abs(re_b));
}

}  // namespace

std::shared_ptr<Eigen::SparseLU<SpMat>> factor_checked(const SpMat& A, bool check, double tol, const char* what) {
  SpMat Ac = A;
  Ac.makeCompressed();
  if (check) {
    const SingularValueEstimate est = estimate_singular_values(Ac);
    if (est.factorization_failed || est.sigma_min < tol * est.sigma_max) {
      throw NearSingularError(std::string(what) + " is singular to working tolerance", est.sigma_min,
                              est.sigma_max);
    }
  }
  auto lu = std::make_shared<Eigen::SparseLU<SpMat>>();
  lu->compute(Ac);
  if (lu->info() != Eigen::Success) {
    throw NearSingularError(std::string(what) + ": factorization failed", 0.0, 0.0);
  }
  return lu;
}

SpMat form_matrix(const DualPair& p, const CoefficientOp& a, const CoefficientOp& m) {
  if (a.dim() != p.n1() || m.dim() != p.n0()) throw ContractError("coefficient sizes do not match the pair");
  SpMat bf = SpMat(p.G.adjoint()) * p.h1.gram() * a.matrix * p.G + p.h0.gram() * m.matrix;
  bf.makeCompressed();
  return bf;
}

// ---------------------------------------------------------------------------

DirichletSolver::DirichletSolver(const DualPair& p, const CoefficientOp& a, const CoefficientOp& m, SolveOptions opt)
    : p_(std::make_shared<const DualPair>(p)), a_(a), m_(m) {
  require(a, m, opt);
  form_ = form_matrix(p, a, m);
  if (p.interior0.cols() > 0) {
    const SpMat V = p.interior0;
    const SpMat inner = SpMat(V.adjoint()) * form_ * V;
    lu_ = factor_checked(inner, !m.coercive(), opt.near_singular_tol, "interior Dirichlet system");
  }
}

Mat DirichletSolver::lift(const Mat& u0) const {
  if (u0.rows() != p_->n0()) throw ContractError("Dirichlet data has the wrong size");
  if (!lu_) return u0;
  const SpMat& V = p_->interior0;
  const Mat rhs = SpMat(V.adjoint()) * (form_ * u0);
  const Mat c = lu_->solve(rhs);
  return u0 - V * c;
}

Vec DirichletSolver::solve_with_source(const Vec& u0, const Vec& f) const {
  if (u0.size() != p_->n0() || f.size() != p_->n0()) throw ContractError("Dirichlet data has the wrong size");
  if (!lu_) return u0;
  const SpMat& V = p_->interior0;
  const Vec rhs = SpMat(V.adjoint()) * (p_->h0.gram() * f - form_ * u0);
  return u0 + V * lu_->solve(rhs);
}

BvpSolution DirichletSolver::solve(const Vec& u0) const {
  BvpSolution s;
  s.u = lift(u0);
  s.q = a_.matrix * (p_->G * s.u);
  const Vec r = SpMat(p_->interior0.adjoint()) * (form_ * s.u);
  const double scale = std::max(inf_norm(form_) * max_abs(s.u), 1e-300);
  s.interior_residual = max_abs(r) / scale;
  s.boundary_data_echo = p_->trace0 * s.u;
  s.energy_bound_ok = energy_ok(*p_, a_, m_, form_, s.u, Scalar(0));
  return s;
}

// ---------------------------------------------------------------------------

NeumannSolver::NeumannSolver(const DualPair& p, const CoefficientOp& a, const CoefficientOp& m, SolveOptions opt)
    : p_(std::make_shared<const DualPair>(p)), a_(a), m_(m) {
  require(a, m, opt);
  form_ = form_matrix(p, a, m);
  lu_ = factor_checked(form_, !m.coercive(), opt.near_singular_tol, "Neumann system");
}

Mat NeumannSolver::solve_form(const Mat& rhs) const {
  if (rhs.rows() != p_->n0()) throw ContractError("Neumann right-hand side has the wrong size");
  return lu_->solve(rhs);
}

BvpSolution NeumannSolver::solve(const Vec& q0) const {
  if (q0.size() != p_->n1()) throw ContractError("Neumann data has the wrong size");
  // (D q0, v)_H0 + (q0, G v)_H1 = v^H (gram0 D + G^H gram1) q0
  const Vec rhs = boundary_form(*p_) * q0;
  BvpSolution s;
  s.u = lu_->solve(rhs);
  s.q = a_.matrix * (p_->G * s.u);
  const double scale = std::max(inf_norm(form_) * max_abs(s.u) + max_abs(rhs), 1e-300);
  s.interior_residual = max_abs(form_ * s.u - rhs) / scale;
  s.boundary_data_echo = p_->trace1 * s.q;
  const Vec t0 = p_->trace1 * q0;
  s.neumann_trace_defect = max_abs(s.boundary_data_echo - t0) / std::max(max_abs(t0), 1e-300);
  s.energy_bound_ok = energy_ok(*p_, a_, m_, form_, s.u, s.u.dot(rhs));
  return s;
}

BvpSolution solve_dirichlet(const DualPair& p, const CoefficientOp& a, const CoefficientOp& m, const Vec& u0,
                            SolveOptions opt) {
  return DirichletSolver(p, a, m, opt).solve(u0);
}

BvpSolution solve_neumann(const DualPair& p, const CoefficientOp& a, const CoefficientOp& m, const Vec& q0,
                          SolveOptions opt) {
  return NeumannSolver(p, a, m, opt).solve(q0);
}

// ---------------------------------------------------------------------------

namespace {

SpMat block2(const SpMat& a11, const SpMat& a12, const SpMat& a21, const SpMat& a22) {
  return vstack(hstack(a11, a12), hstack(a21, a22));
}

}  // namespace

BlockSolver::BlockSolver(const DualPair& p, const CoefficientOp& a, const CoefficientOp& m, BlockVariant variant,
                         SolveOptions opt)
    : p_(std::make_shared<const DualPair>(p)), variant_(variant) {
  require(a, m, opt);
  const SpMat& g0 = p.h0.gram();
  const SpMat& g1 = p.h1.gram();
  const SpMat ainv = a.inverse();
  if (variant == BlockVariant::Dirichlet) {
    const SpMat& V = p.interior0;
    const SpMat Vg0 = SpMat(V.adjoint()) * g0;
    A_ = block2(Vg0 * m.matrix * V, -(Vg0 * p.D), -(p.G * V), ainv);
  } else {
    A_ = block2(g0 * m.matrix, SpMat(p.G.adjoint()) * g1, -p.G, ainv);
  }
  lu_ = factor_checked(A_, !m.coercive(), opt.near_singular_tol, "block system");
}

Mat BlockSolver::solve(const Mat& f0, const Mat& f1, double* residual) const {
  const DualPair& p = *p_;
  if (f0.rows() != p.n0() || f1.rows() != p.n1() || f0.cols() != f1.cols()) {
    throw ContractError("block right-hand side has the wrong size");
  }
  const SpMat& g0 = p.h0.gram();
  const bool dir = variant_ == BlockVariant::Dirichlet;
  const Index k0 = dir ? p.interior0.cols() : p.n0();
  Mat b(k0 + p.n1(), f0.cols());
  if (dir) b.topRows(k0) = SpMat(p.interior0.adjoint()) * (g0 * f0);
  else b.topRows(k0) = g0 * f0;
  b.bottomRows(p.n1()) = f1;
  const Mat x = lu_->solve(b);
  if (residual) {
    *residual = 0.0;
    const double an = inf_norm(A_);
    for (Index j = 0; j < x.cols(); ++j) {
      const Vec xj = x.col(j), bj = b.col(j);
      *residual = std::max(*residual, max_abs(A_ * xj - bj) / std::max(an * max_abs(xj) + max_abs(bj), 1e-300));
    }
  }
  Mat out(p.n0() + p.n1(), f0.cols());
  if (dir) out.topRows(p.n0()) = p.interior0 * x.topRows(k0);
  else out.topRows(p.n0()) = x.topRows(k0);
  out.bottomRows(p.n1()) = x.bottomRows(p.n1());
  return out;
}

BlockSolution solve_block(const DualPair& p, const CoefficientOp& a, const CoefficientOp& m, const Vec& f0,
                          const Vec& f1, BlockVariant variant, SolveOptions opt) {
  const BlockSolver solver(p, a, m, variant, opt);
  BlockSolution s;
  const Mat x = solver.solve(f0, f1, &s.residual);
  s.u = x.col(0).head(p.n0());
  s.q = x.col(0).tail(p.n1());
  return s;
}

ResolventBound block_resolvent_bound(const DualPair& p, const Mat& M) {
  const Index n0 = p.n0(), n1 = p.n1(), n = n0 + n1;
  if (M.rows() != n || M.cols() != n) throw ContractError("block operator has the wrong size");
  std::vector<Triplet> t;
  for (const SpMat* g : {&p.h0.gram(), &p.h1.gram()}) {
    const Index off = g == &p.h0.gram() ? 0 : n0;
    for (Index k = 0; k < g->outerSize(); ++k)
      for (SpMat::InnerIterator it(*g, k); it; ++it) t.emplace_back(off + it.row(), off + it.col(), it.value());
  }
  SpMat gram(n, n);
  gram.setFromTriplets(t.begin(), t.end());

  const Mat Gd = Mat(p.G);
  const Mat Gdag = weighted_adjoint(Gd, p.h0, p.h1);
  Mat A = Mat::Zero(n, n);
  A.block(0, n0, n0, n1) = Gdag;
  A.block(n0, 0, n1, n0) = -Gd;

  const Mat S = (M + A).partialPivLu().inverse();
  const GramFactor F(gram);
  const Mat Fm = F.apply(Mat::Identity(n, n));
  const Mat Finv = F.solve(Fm.adjoint());
  Mat N(2 * n, n);
  N.topRows(n) = Fm * S * Finv;
  N.bottomRows(n) = Fm * A * S * Finv;

  ResolventBound r;
  r.norm = singular_values(N)(0);
  r.lambda = hermitian_part_min(M, gram);
  r.m_norm = weighted_operator_norm(M, gram);
  r.bound = r.lambda > 0 ? (1.0 + r.lambda + r.m_norm) / r.lambda : std::numeric_limits<double>::infinity();
  return r;
}

}  // namespace dtnlab
