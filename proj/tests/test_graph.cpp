#include <doctest.h>

#include <cmath>

#include "dtnlab/dtn_graph.hpp"
#include "oracles.hpp"

using namespace dtnlab;
using Eigen::Index;

namespace {

struct Case {
  DualPair p;
  BoundarySpaces bs;
  CoefficientOp a, m;
};

Case eigen_case(int n) {
  DualPair p = build_interval_pair(n);
  BoundarySpaces bs = boundary_spaces(p);
  const double lam1 = oracle::discrete_dirichlet_eigenvalue(1, p.meshwidth);
  CoefficientOp a = constant_coefficient(p, Which::A, 1.0);
  CoefficientOp m = constant_coefficient(p, Which::M, -lam1);
  return {std::move(p), std::move(bs), std::move(a), std::move(m)};
}

Vec sine_mode(const DualPair& p) {
  Vec u(p.n0());
  for (Index i = 0; i < p.n0(); ++i) u(i) = std::sin(oracle::pi * p.coords0(i, 0));
  return u;
}

}  // namespace

TEST_CASE("the sine mode is the interior eigenvector at the discrete eigenvalue") {
  const Case c = eigen_case(64);
  const SpMat B = form_matrix(c.p, c.a, c.m);
  const Vec r = B * sine_mode(c.p);
  // interior rows vanish, boundary rows carry the flux
  CHECK(r.segment(1, c.p.n0() - 2).norm() < 1e-10 * r.norm());
}

TEST_CASE("form operators represent b in the graph inner products") {
  const DualPair p = build_interval_pair(20);
  const auto a = coefficient_from_spec(CoefficientSpec::make_expression("1+x"), p, Which::A);
  const auto m = constant_coefficient(p, Which::M, 2.0);
  const FormOperators f = form_operators(p, a, m);
  CHECK(f.residual < 1e-12);
  CHECK(f.residual_interior < 1e-12);
}

TEST_CASE("non-coercive graph at the first Dirichlet eigenvalue") {
  const Case c = eigen_case(64);
  const LinearGraph g = dtn_graph(c.p, c.bs, c.a, c.m);
  CHECK(g.dim_weak_kernel == 2);
  CHECK(g.dim_interior_kernel == 1);
  CHECK(g.dim_weak_kernel == g.dom.dim() + g.dim_interior_kernel);
  CHECK(g.dim_weak_kernel == c.bs.g.dim());
  CHECK(g.dom.dim() == 1);
  REQUIRE(g.mul.dim() == 1);
  CHECK_FALSE(g.single_valued());
  CHECK(g.mul_crosscheck < 1e-10);
  const Mat target = c.bs.d.coords(Mat(c.p.G * sine_mode(c.p)));
  CHECK(oracle::max_angle_sine(g.mul.basis, target) < 1e-8);
  CHECK_THROWS_AS(g.as_operator(), GraphNotOperatorError);
}

TEST_CASE("domain routes agree at the eigenvalue and the literal form predicts codim 1") {
  const Case c = eigen_case(64);
  const DomainReport d = graph_domain_check(c.p, c.bs, c.a, c.m);
  CHECK(d.codim() == 1);
  CHECK(d.routes_agree);
  CHECK(d.route_angle <= 1e-9);
  CHECK(d.literal_codim == 1);
  CHECK(d.literal_defect < 1e-9);
  const DomainReport n = ntd_domain_check(c.p, c.bs, c.a, c.m);
  CHECK(n.routes_agree);
  CHECK(n.adjoint_kernel_dim == 1);
  CHECK(n.literal_codim == 1);
  CHECK(n.riesz_residual < 1e-10);
}

TEST_CASE("away from eigenvalues the graph is an operator equal to the BD-level DtN") {
  const DualPair p = build_interval_pair(64);
  const BoundarySpaces bs = boundary_spaces(p);
  const auto a = constant_coefficient(p, Which::A, 1.0);
  for (double mv : {1.0, -5.0}) {
    const auto m = constant_coefficient(p, Which::M, mv);
    const LinearGraph g = dtn_graph(p, bs, a, m);
    CHECK(g.single_valued());
    CHECK(g.dom.dim() == bs.g.dim());
    SolveOptions o;
    o.require_coercive = false;
    const DtnBd bd = dtn_bd(p, bs, a, m, o);
    CHECK((g.as_operator() - bd.lambda).norm() < 1e-9 * bd.lambda.norm());
    const DomainReport d = graph_domain_check(p, bs, a, m);
    CHECK(d.codim() == 0);
    CHECK(d.routes_agree);
  }
}

TEST_CASE("eigenvalue dichotomy on the interval family") {
  const DualPair p = build_interval_pair(32);
  const BoundarySpaces bs = boundary_spaces(p);
  const auto a = constant_coefficient(p, Which::A, 1.0);
  for (int k : {1, 2, 3}) {
    const double lk = oracle::discrete_dirichlet_eigenvalue(k, p.meshwidth);
    CHECK(dtn_graph(p, bs, a, constant_coefficient(p, Which::M, -lk)).mul.dim() == 1);
    const double mid = 0.5 * (lk + oracle::discrete_dirichlet_eigenvalue(k + 1, p.meshwidth));
    CHECK(dtn_graph(p, bs, a, constant_coefficient(p, Which::M, -mid)).mul.dim() == 0);
  }
}

TEST_CASE("pivot DtN is Hermitian for real coefficients") {
  const DualPair p = build_interval_pair(48);
  const PivotSpace piv = default_pivot(p, bd_space(p, Side::G));
  const auto a = coefficient_from_spec(CoefficientSpec::make_expression("2+sin(2*pi*x)"), p, Which::A);
  const auto m = constant_coefficient(p, Which::M, -3.0);
  SolveOptions o;
  o.require_coercive = false;
  const Mat W = Mat(piv.space.gram()) * pivot_matrix(p, a, m, piv, o);
  CHECK((W - W.adjoint()).norm() <= 1e-10 * W.norm());
}

TEST_CASE("pivot graph resolvent") {
  const DualPair p = build_interval_pair(64);
  const PivotSpace piv = default_pivot(p, bd_space(p, Side::G));
  const auto a = constant_coefficient(p, Which::A, 1.0);
  const auto m = constant_coefficient(p, Which::M, -5.0);
  const PivotResolvent r = graph_resolvent(p, a, m, piv, 100.0);
  CHECK(r.residual < 1e-10);
  CHECK(r.omega < 100.0);
  const Mat I = Mat::Identity(r.resolvent.rows(), r.resolvent.cols());
  CHECK(((100.0 * I + r.lambda_h) * r.resolvent - I).norm() < 1e-10);
  CHECK_THROWS_AS(graph_resolvent(p, a, m, piv, r.omega - 1.0), ContractError);
  const Case c = eigen_case(64);
  const PivotSpace piv2 = default_pivot(c.p, c.bs.g);
  CHECK_THROWS_AS(graph_resolvent(c.p, c.a, c.m, piv2, 1e3), GraphNotOperatorError);
}

TEST_CASE("column space respects an absolute scale") {
  Mat X = Mat::Zero(3, 2);
  X(0, 0) = 1.0;
  X(1, 1) = 1e-6;
  CHECK(column_space(X).dim() == 2);
  TolerancePolicy t;
  t.rank_rel_tol = 1e-8;
  CHECK(column_space(X, t, 1e3).dim() == 1);
}
