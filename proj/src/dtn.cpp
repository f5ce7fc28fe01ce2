#include "dtnlab/dtn.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace dtnlab {

using Eigen::Index;

namespace {

PivotSpace make_pivot(const DualPair& p, const BoundarySpace& bdg, const RVec& weights, const TolerancePolicy& tol) {
  if (weights.size() != p.b0()) throw ConfigError("pivot weights must have one entry per boundary dof");
  if ((weights.array() <= 0.0).any()) throw ConfigError("pivot weights must be positive");
  PivotSpace piv;
  piv.space = WeightedSpace::diagonal(weights);
  piv.trace = p.trace0;
  piv.kappa = p.trace0 * bdg.basis;
  const Index r = numeric_rank(piv.kappa, tol);
  if (r != piv.kappa.cols() || r != piv.kappa.rows()) {
    throw ContractError("kappa is not injective with dense range");
  }
  return piv;
}

double spectral_norm(const Mat& m) { return m.size() ? singular_values(m)(0) : 0.0; }

// Tr^H (Tr Tr^H)^{-1}: trace lift with j(R phi) = phi
Mat trace_lift(const SpMat& trace) {
  const Mat T(trace);
  const Mat TT = T * T.adjoint();
  return T.adjoint() * TT.llt().solve(Mat::Identity(TT.rows(), TT.cols()));
}

// F M F^{-1} with F^H F = gram
Mat orthonormal_coordinates(const Mat& M, const WeightedSpace& s) {
  const Index n = s.dim();
  const Mat F = s.factor().apply(Mat::Identity(n, n));
  const Mat Finv = s.solve(F.adjoint());
  return F * M * Finv;
}

}  // namespace

Mat PivotSpace::kappa_adjoint() const { return kappa.adjoint() * space.gram(); }

PivotSpace default_pivot(const DualPair& p, const BoundarySpace& bdg, const TolerancePolicy& tol) {
  return make_pivot(p, bdg, p.boundary_weights, tol);
}

PivotSpace custom_pivot(const DualPair& p, const BoundarySpace& bdg, const RVec& weights, const TolerancePolicy& tol) {
  return make_pivot(p, bdg, weights, tol);
}

Vec kappa_adjoint_lift(const PivotSpace& piv, const BoundarySpace& bdg, const Vec& psi) {
  if (psi.size() != piv.dim()) throw ContractError("kappa_adjoint_lift: vector is not in H");
  return bdg.basis * (piv.kappa_adjoint() * psi);
}

// ---------------------------------------------------------------------------

DtnBd dtn_bd(const DualPair& p, const BoundarySpaces& bs, const CoefficientOp& a, const CoefficientOp& m,
             SolveOptions opt) {
  DtnBd r;
  const Mat& B0 = bs.g.basis;
  const DirichletSolver dir(p, a, m, opt);
  const Mat U = dir.lift(B0);
  r.lambda = bs.d.coords(Mat(a.matrix * (p.G * U)));

  const BlockSolver block(p, a, m, BlockVariant::Dirichlet, opt);
  const Mat x = block.solve(-(m.matrix * B0), p.G * B0);
  r.lambda_block = bs.d.coords(Mat(x.bottomRows(p.n1())));
  const double scale = std::max(r.lambda.cwiseAbs().maxCoeff(), 1.0);
  r.route_agreement = (r.lambda - r.lambda_block).cwiseAbs().maxCoeff() / scale;
  return r;
}

Mat ntd_bd(const DualPair& p, const BoundarySpaces& bs, const CoefficientOp& a, const CoefficientOp& m,
           SolveOptions opt) {
  if (p.b0() != p.b1()) throw ContractError("ntd_bd needs as many flux dofs as trace dofs");
  if (!a.coercive()) throw ContractError("coefficient a is not coercive");
  if (opt.require_coercive && !m.coercive()) throw ContractError("coefficient m is not coercive");
  const SpMat& V = p.interior0;
  const SpMat& W = p.interior1;
  const SpMat Vg0 = SpMat(V.adjoint()) * p.h0.gram();
  const SpMat ainv = a.inverse();
  const SpMat A = vstack(hstack(Vg0 * m.matrix, -(Vg0 * p.D * W)), hstack(-p.G, ainv * W));
  const auto lu = factor_checked(A, !m.coercive(), opt.near_singular_tol, "constrained Neumann block");
  const Mat& Q0 = bs.d.basis;
  Mat rhs(A.rows(), Q0.cols());
  rhs.topRows(V.cols()) = Vg0 * (p.D * Q0);
  rhs.bottomRows(p.n1()) = -(ainv * Q0);
  const Mat x = lu->solve(rhs);
  return bs.g.coords(Mat(x.topRows(p.n0())));
}

// ---------------------------------------------------------------------------

Mat pivot_matrix(const DualPair& p, const CoefficientOp& a, const CoefficientOp& m, const PivotSpace& piv,
                 SolveOptions opt) {
  const Mat R = trace_lift(piv.trace);
  const DirichletSolver dir(p, a, m, opt);
  const Mat E = dir.lift(R);
  const Mat S = R.adjoint() * (dir.form() * E);
  return piv.space.solve(S);
}

DtnOperator dtn_pivot(const DualPair& p, const CoefficientOp& a, const CoefficientOp& m, const PivotSpace& piv,
                      std::uint64_t seed, SolveOptions opt) {
  DtnOperator op;
  op.lambda_h = pivot_matrix(p, a, m, piv, opt);
  const WeightedSpace& h = piv.space;
  op.vertex = hermitian_part_min(op.lambda_h, h.gram());
  const Mat adj = h.solve(op.lambda_h.adjoint() * h.gram());
  op.hermitian_defect = spectral_norm(op.lambda_h - adj) / std::max(spectral_norm(op.lambda_h), 1e-300);
  op.symmetric = op.hermitian_defect <= 1e-10;
  const SectorReport rep = sector_report(op.lambda_h, h, static_cast<int>(50 * h.dim()), seed);
  const double ref = op.vertex > 0.0 ? 0.0 : op.vertex - 1.0;
  double angle = 0.0;
  for (const Scalar& z : rep.quotients) angle = std::max(angle, std::atan2(std::abs(z.imag()), z.real() - ref));
  op.half_angle = angle;
  return op;
}

PivotInverse dtn_pivot_inverse(const DualPair& p, const BoundarySpace& bdg, const CoefficientOp& a,
                               const CoefficientOp& m, const PivotSpace& piv, SolveOptions opt) {
  const Index nh = piv.dim();
  const Mat W0 = bdg.basis * piv.kappa_adjoint();  // kappa^* on the unit vectors of H
  const SpMat ainv = a.inverse();
  const BlockSolver block(p, a, m, BlockVariant::Neumann, opt);
  const Mat x = block.solve(W0, -(ainv * (p.G * W0)));
  PivotInverse r;
  r.inverse = piv.kappa * bdg.coords(Mat(x.topRows(p.n0())));
  const Mat lam = pivot_matrix(p, a, m, piv, opt);
  r.roundtrip = spectral_norm(lam * r.inverse - Mat::Identity(nh, nh));
  return r;
}

// ---------------------------------------------------------------------------

double SectorConstants::half_angle() const { return std::atan(c / mu_tilde); }

SectorConstants sector_constants(const DualPair& p, const CoefficientOp& a, const CoefficientOp& m,
                                 const PivotSpace& piv, std::optional<double> mu_tilde, SolveOptions opt) {
  if (!a.coercive()) throw ContractError("sector constants need a coercive a");
  SectorConstants sc;
  sc.mu_tilde = mu_tilde.value_or(0.5 * *a.coercivity_mu);
  sc.c = a.norm_bound + m.norm_bound;

  const Mat R = trace_lift(piv.trace);
  const DirichletSolver dir(p, a, m, opt);
  const Mat E = dir.lift(R);
  const SpMat K0 = graph_gram(p, Side::G);
  const Mat P = E.adjoint() * (K0 * E);
  const Mat Bq = E.adjoint() * (dir.form() * E);
  const Mat X = sc.mu_tilde * P - 0.5 * (Bq + Bq.adjoint());
  const Index n = piv.dim();
  const Mat F = piv.space.factor().apply(Mat::Identity(n, n));
  const Mat Finv = piv.space.solve(F.adjoint());
  const Mat S = Finv.adjoint() * X * Finv;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (S + S.adjoint()), Eigen::EigenvaluesOnly);
  sc.omega = std::max(0.0, es.eigenvalues().maxCoeff());
  return sc;
}

Mat seeded_gaussian(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  const auto uniform = [&eng]() { return static_cast<double>(eng() >> 11) * 0x1.0p-53; };
  const auto normal = [&]() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  };
  Mat out(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) {
      const double re = normal();
      const double im = normal();
      out(i, j) = Scalar(re, im) / std::sqrt(2.0);
    }
  return out;
}

SectorReport sector_report(const Mat& lambda_h, const WeightedSpace& h, int samples, std::uint64_t seed,
                           const std::optional<SectorConstants>& sector) {
  const Index n = h.dim();
  if (samples < n) throw ContractError("sector_report needs at least dim H samples");
  const Mat Mt = orthonormal_coordinates(lambda_h, h);
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (Mt + Mt.adjoint()));
  Mat dirs(n, samples + n);
  dirs.leftCols(samples) = seeded_gaussian(n, samples, seed);
  dirs.rightCols(n) = es.eigenvectors();

  SectorReport r;
  r.vertex = std::numeric_limits<double>::infinity();
  r.worst_margin = std::numeric_limits<double>::infinity();
  const double scale = std::max(1.0, Mt.norm());
  for (Index j = 0; j < dirs.cols(); ++j) {
    const Vec y = dirs.col(j);
    const Scalar z = y.dot(Mt * y) / y.squaredNorm();
    r.quotients.push_back(z);
    r.vertex = std::min(r.vertex, z.real());
    if (sector) {
      const double margin = std::tan(sector->half_angle()) * (z.real() + sector->omega) - std::abs(z.imag());
      r.worst_margin = std::min(r.worst_margin, margin);
      if (margin < -1e-12 * scale) r.contained = false;
      r.half_angle = std::max(r.half_angle, std::atan2(std::abs(z.imag()), z.real() + sector->omega));
    }
  }
  if (!sector) {
    for (const Scalar& z : r.quotients)
      r.half_angle = std::max(r.half_angle, std::atan2(std::abs(z.imag()), z.real() - r.vertex + 1e-300));
    r.worst_margin = 0.0;
  }
  return r;
}

Correspondence dtn_correspondence(const DualPair& p, const BoundarySpaces& bs, const Mat& lambda_bd,
                                  const Mat& lambda_h, const PivotSpace& piv) {
  const Mat pulled = piv.kappa_adjoint() * lambda_h * piv.kappa;  // BD(G) coords
  const Mat g = p.G * (bs.g.basis * pulled);
  const Mat delta = bs.d.basis * lambda_bd - g;
  const double lam = spectral_norm(lambda_bd);
  const GramFactor F(bs.d.graph_gram);
  Correspondence c;
  c.defect = spectral_norm(F.apply(delta)) / lam;
  c.coordinates = spectral_norm(lambda_bd - bs.d.coords(g)) / lam;
  return c;
}

}  // namespace dtnlab
