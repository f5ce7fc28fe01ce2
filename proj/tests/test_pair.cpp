#include <doctest.h>

#include <cmath>

#include "dtnlab/boundary_spaces.hpp"
#include "dtnlab/coefficient.hpp"
#include "oracles.hpp"

using namespace dtnlab;
using Eigen::Index;

namespace {

oracle::RMat real(const SpMat& m) { return Mat(m).real(); }

}  // namespace

TEST_CASE("interval pair matches the dense construction") {
  for (int n : {2, 16, 64}) {
    const DualPair p = build_interval_pair(n);
    const oracle::Interval o = oracle::interval(n);
    CHECK(p.n0() == n + 2);
    CHECK(p.n1() == n + 1);
    CHECK(p.meshwidth == doctest::Approx(o.h));
    CHECK((real(p.h0.gram()) - o.g0).norm() < 1e-14);
    CHECK((real(p.h1.gram()) - o.g1).norm() < 1e-14);
    CHECK((real(p.G) - o.G).norm() < 1e-12 * o.G.norm());
    CHECK((real(p.D) - o.D).norm() < 1e-12 * o.D.norm());
    CHECK((real(p.trace0) - o.T0).norm() < 1e-14);
    CHECK((real(p.trace1) - o.T1).norm() < 1e-14);
  }
}

TEST_CASE("boundary form factorization and skew pairing on interior arguments") {
  const oracle::Interval o = oracle::interval(16);
  // G^T g1 + g0 D = T0^T beta T1 by construction of D
  const oracle::RMat form = o.G.transpose() * o.g1 + o.g0 * o.D;
  CHECK((form - o.T0.transpose() * o.beta * o.T1).norm() < 1e-12);
  const DualPair p = build_interval_pair(16);
  CHECK((real(boundary_form(p)) - form).norm() < 1e-10);
}

TEST_CASE("pair validation passes on the shipped builders") {
  for (const DualPair& p : {build_interval_pair(2), build_interval_pair(16), build_interval_pair(256),
                            build_rectangle_pair(2, 2), build_rectangle_pair(8, 8), build_rectangle_pair(5, 3)}) {
    const PairReport r = validate_pair(p);
    for (const auto& c : r.checks) {
      INFO(p.kind << " " << c.name << " residual " << c.residual);
      CHECK(c.pass);
    }
    CHECK(r.at("boundary_form").residual <= 1e-12);
    CHECK(r.at("kernel_trace0").residual <= 1e-10);
    CHECK(r.at("kernel_trace1").residual <= 1e-10);
  }
}

TEST_CASE("validation detects a broken pair") {
  DualPair p = build_interval_pair(8);
  p.D = p.D * Scalar(1.01);
  CHECK_FALSE(validate_pair(p).pass());
  CHECK_FALSE(validate_pair(p).at("boundary_form").pass);
}

TEST_CASE("rectangle sizes and boundary bookkeeping") {
  const DualPair p = build_rectangle_pair(3, 2);
  CHECK(p.n0() == 5 * 4);
  // x-faces: (nx+1)*(ny+2), y-faces: (nx+2)*(ny+1)
  CHECK(p.n1() == 4 * 4 + 5 * 3);
  CHECK(p.b0() == static_cast<Index>(p.boundary_nodes.size()));
  CHECK(p.b0() == 2 * 5 + 2 * 4 - 4);
  CHECK(p.boundary_weights.sum() == doctest::Approx(4.0));  // perimeter of the unit square
}

TEST_CASE("coefficient sampling") {
  const DualPair p = build_interval_pair(7);
  const CoefficientOp a = coefficient_from_spec(CoefficientSpec::make_expression("2+sin(2*pi*{n}*x)"), p, Which::A, 3);
  REQUIRE(a.dim() == p.n1());
  for (Index i = 0; i < p.n1(); ++i) {
    const double x = (i + 0.5) / 8.0;
    CHECK(a.matrix.coeff(i, i).real() == doctest::Approx(2.0 + std::sin(6.0 * kPi * x)));
  }
  CHECK(a.hermitian);
  CHECK(a.coercive());
  const CoefficientOp m = coefficient_from_spec(CoefficientSpec::make_constant(-2.0), p, Which::M);
  CHECK(m.dim() == p.n0());
  CHECK_FALSE(m.coercive());
  CHECK(m.norm_bound == doctest::Approx(2.0));
  CHECK(instantiate_template("sin({n}*x)+{n}", 12) == "sin(12*x)+12");
}

TEST_CASE("complex coefficient constants") {
  const DualPair p = build_interval_pair(9);
  const CoefficientOp a =
      coefficient_from_spec(CoefficientSpec::make_expression("1", "0.5*sin(2*pi*x)"), p, Which::A);
  CHECK_FALSE(a.hermitian);
  CHECK(a.hermitian_min == doctest::Approx(1.0));
  CHECK(*a.coercivity_mu == doctest::Approx(1.0));
  const SpMat inv = a.inverse();
  CHECK((Mat(inv * a.matrix) - Mat::Identity(p.n1(), p.n1())).norm() < 1e-13);
}

TEST_CASE("checkerboard coefficient alternates on cells of width 1/(2n)") {
  const DualPair p = build_interval_pair(15);  // midpoints (i + 1/2)/16
  const CoefficientOp a = coefficient_from_spec(CoefficientSpec::make_checkerboard(1.0, 4.0), p, Which::A, 2);
  // cell width 1/4: midpoints 1/32, 3/32 -> cell 0, 9/32 -> cell 1
  CHECK(a.matrix.coeff(0, 0).real() == doctest::Approx(1.0));
  CHECK(a.matrix.coeff(4, 4).real() == doctest::Approx(4.0));
  CHECK(a.matrix.coeff(8, 8).real() == doctest::Approx(1.0));
}

TEST_CASE("coefficient configuration errors") {
  const DualPair p = build_interval_pair(4);
  CHECK_THROWS_AS(coefficient_from_spec(CoefficientSpec::make_values({1.0, 2.0}), p, Which::A), ConfigError);
  CHECK_THROWS_AS(coefficient_from_spec(CoefficientSpec::make_expression("1/(x-x)"), p, Which::A), ConfigError);
}

TEST_CASE("tensor coefficient on the rectangle acts per face family") {
  const DualPair p = build_rectangle_pair(3, 3);
  const CoefficientOp a = coefficient_from_spec(
      CoefficientSpec::make_tensor(CoefficientSpec::make_constant(2.0), CoefficientSpec::make_constant(5.0)), p,
      Which::A);
  for (Index i = 0; i < p.n1(); ++i)
    CHECK(a.matrix.coeff(i, i).real() == doctest::Approx(p.face_family[static_cast<std::size_t>(i)] == 0 ? 2.0 : 5.0));
}

TEST_CASE("boundary spaces: dimensions, orthogonality, relaxed identity") {
  for (const DualPair& p : {build_interval_pair(2), build_interval_pair(16), build_interval_pair(256),
                            build_rectangle_pair(2, 2), build_rectangle_pair(8, 8)}) {
    const BoundarySpaces bs = boundary_spaces(p);
    CHECK(bs.g.dim() == static_cast<Index>(p.boundary_nodes.size()));
    const BdDiagnostics d = bd_diagnostics(p, bs);
    CHECK(d.orthogonality_g <= 1e-12);
    CHECK(d.orthogonality_d <= 1e-12);
    CHECK(d.orthonormality <= 1e-12);
    CHECK(d.relaxed_lbd_g <= 1e-12);
    CHECK(d.relaxed_lbd_d <= 1e-12);
    CHECK(d.flux_identity <= 1e-12);
  }
}

TEST_CASE("BD(G) on the interval is spanned by the discrete exponentials") {
  // (1 - DG) u = 0 in the interior: u_{i+1} - 2u_i + u_{i-1} = h^2 u_i, i.e.
  // u = r^i with r + 1/r = 2 + h^2
  const int n = 32;
  const DualPair p = build_interval_pair(n);
  const BoundarySpace bd = bd_space(p, Side::G);
  const double h = p.meshwidth;
  const double b = 2.0 + h * h;
  const double r = (b + std::sqrt(b * b - 4.0)) / 2.0;
  Mat E(n + 2, 2);
  for (int i = 0; i < n + 2; ++i) {
    E(i, 0) = std::pow(r, i);
    E(i, 1) = std::pow(r, -i);
  }
  CHECK(oracle::max_angle_sine(bd.basis, E) < 1e-10);
}

TEST_CASE("asymptotic boundary-space defects decrease with the mesh") {
  double prev_strict = 1e300, prev_unit = 1e300;
  for (int n : {64, 128, 256}) {
    const DualPair p = build_interval_pair(n);
    const BdDiagnostics d = bd_diagnostics(p, boundary_spaces(p));
    CHECK(d.strict_lbd < prev_strict);
    CHECK(d.unitarity < prev_unit);
    prev_strict = d.strict_lbd;
    prev_unit = d.unitarity;
  }
  CHECK(prev_unit < 1e-2);
}

TEST_CASE("g-dot and d-dot coordinate maps and the boundary pairing") {
  const DualPair p = build_interval_pair(16);
  const BoundarySpaces bs = boundary_spaces(p);
  const Vec u = bs.g.basis.col(0);
  const DotResult gd = g_dot(p, bs, u);
  CHECK((bs.d.coords(gd.value) - bs.g_dot.col(0)).norm() < 1e-12);
  const Vec q = bs.d.basis.col(1);
  const DotResult dd = d_dot(p, bs, q);
  CHECK((bs.g.coords(dd.value) - bs.d_dot.col(1)).norm() < 1e-12);
  // pairing of interior arguments vanishes
  Vec ui = Vec::Zero(p.n0());
  ui(5) = 1.0;
  Vec qi = Vec::Zero(p.n1());
  qi(3) = 1.0;
  CHECK(std::abs(phi_pairing(p, qi, ui)) < 1e-10);
  // bd_from_trace has the requested trace
  Vec phi(2);
  phi << 1.0, -2.0;
  CHECK((p.trace0 * bd_from_trace(p, bs.g, phi) - phi).norm() < 1e-12);
}
