#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "dtnlab/convergence.hpp"
#include "oracles.hpp"

using namespace dtnlab;
using Eigen::Index;

namespace {

const std::vector<ScheduleRow> kSchedule{{4, 512}, {8, 1024}, {16, 2048}, {32, 4096}};
const std::vector<ScheduleRow> kShort{{4, 256}, {8, 512}, {16, 1024}};

CoefficientSequence harmonic_family() {
  CoefficientSequence s;
  s.a = CoefficientSpec::make_expression("2+sin(2*pi*{n}*x)");
  s.m = CoefficientSpec::make_constant(1.0);
  s.a_limit = CoefficientSpec::make_constant(std::sqrt(3.0));
  s.m_limit = s.m;
  s.mu = 1.0;
  s.norm_cap = 3.0;
  return s;
}

}  // namespace

TEST_CASE("harmonic means by quadrature") {
  const double ref = oracle::harmonic_mean([](double y) { return 2.0 + std::sin(2.0 * oracle::pi * y); });
  CHECK(std::abs(ref - std::sqrt(3.0)) < 1e-10);
  CHECK(std::abs(harmonic_mean([](double y) { return 2.0 + std::sin(2.0 * kPi * y); }) - ref) < 1e-10);
  // checkerboard {1, 4} on equal measure: 1 / (1/2 + 1/8) = 1.6
  CHECK(harmonic_mean([](double y) { return y < 0.5 ? 1.0 : 4.0; }) == doctest::Approx(1.6));
}

TEST_CASE("compressed coefficient") {
  const DualPair p = build_interval_pair(16);
  const auto a = coefficient_from_spec(CoefficientSpec::make_expression("2+x"), p, Which::A);
  const CompressedCoefficient c = compressed_coefficient(p, a);
  CHECK(c.full_range);
  CHECK(c.rank == p.n1());
  CHECK(numeric_rank(Mat(p.G)) == p.n1());
  CHECK((Mat(c.compressed) - Mat(a.matrix)).norm() < 1e-12);
  CHECK((Mat(c.compressed * c.inverse) - Mat::Identity(p.n1(), p.n1())).norm() < 1e-12);
  const CompressedCoefficient id = compressed_coefficient(p, constant_coefficient(p, Which::A, 1.0));
  CHECK((Mat(id.compressed) - Mat::Identity(p.n1(), p.n1())).norm() < 1e-14);

  const DualPair r = build_rectangle_pair(2, 2);
  const CompressedCoefficient cr = compressed_coefficient(r, constant_coefficient(r, Which::A, 1.0));
  const RVec sv = Eigen::JacobiSVD<Mat>(Mat(r.G)).singularValues();
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i) rank += sv(i) > 1e-10 * sv(0);
  CHECK(cr.rank == rank);
  CHECK(cr.rank == r.n0() - 1);
  CHECK_FALSE(cr.full_range);
  CHECK((Mat(cr.compressed) - Mat::Identity(cr.rank, cr.rank)).norm() < 1e-10);
  CHECK((cr.basis.adjoint() * r.h1.gram() * cr.basis - Mat::Identity(cr.rank, cr.rank)).norm() < 1e-10);
}

TEST_CASE("Poincare constant") {
  const DualPair p = build_interval_pair(512);
  const double c = poincare_constant(p);
  const oracle::Interval o = oracle::interval(128);
  const double c128 = 1.0 / std::sqrt(oracle::neumann_gap(o.G, o.g0, o.g1));
  CHECK(std::abs(c - 1.0 / oracle::pi) <= 1e-3);
  CHECK(poincare_constant(build_interval_pair(128)) == doctest::Approx(c128).epsilon(1e-10));
  CHECK(poincare_check(p, c, 100, 42) <= 1.0 + 1e-12);
  // dilating gram0 by 4 doubles the constant
  DualPair q = build_interval_pair(64);
  const double c64 = poincare_constant(q);
  q.h0 = WeightedSpace(SpMat(q.h0.gram() * Scalar(4.0)));
  CHECK(poincare_constant(q) == doctest::Approx(2.0 * c64).epsilon(1e-10));
}

TEST_CASE("schedule guard enforces resolution of the oscillation") {
  CHECK_NOTHROW(check_schedule({{4, 31}}));
  CHECK_THROWS_AS(check_schedule({{4, 30}}), ConfigError);
  CHECK_THROWS_AS(check_schedule({}), ConfigError);
  CHECK_THROWS_AS(wot_resolvent_experiment(harmonic_family(), {{8, 32}}), ConfigError);
}

TEST_CASE("hypothesis guards abort before measurement") {
  CoefficientSequence s = harmonic_family();
  s.mu = 1.5;
  CHECK_THROWS_AS(wot_resolvent_experiment(s, kShort), ConfigError);
  s = harmonic_family();
  s.norm_cap = 2.5;
  CHECK_THROWS_AS(compressed_inverse_convergence(s, kShort), ConfigError);
}

TEST_CASE("homogenization of 2 + sin(2 pi n x)") {
  const ConvergenceReport r = wot_resolvent_experiment(harmonic_family(), kSchedule);
  const auto gap = r.series("inv_gap_rel");
  REQUIRE(gap.size() == 4);
  CHECK(gap.back() <= 0.05);
  CHECK(gap.back() <= 0.5 * gap.front());
  CHECK(r.trend_ratio("wot_witness") <= 0.5);
  CHECK(r.trend_ratio("vector_gap") <= 0.5);
  for (double f : r.series("control_floor")) CHECK(f < 1e-5);
  for (const auto& row : r.rows) {
    CHECK(std::isfinite(row.value));
    CHECK(row.runtime_ms == 0.0);
  }
}

TEST_CASE("stationary sequence stays at the discretization floor") {
  CoefficientSequence s = harmonic_family();
  s.a = CoefficientSpec::make_constant(2.0);
  s.a_limit = s.a;
  const ConvergenceReport r = wot_resolvent_experiment(s, kShort);
  for (double g : r.series("inv_gap_rel")) CHECK(g < 1e-12);
  const ConvergenceReport c = compressed_inverse_convergence(s, kShort);
  for (double g : c.series("compressed_wot")) CHECK(g < 1e-14);
}

TEST_CASE("weak-* convergence of m_n = 1 + sin/2") {
  CoefficientSequence s;
  s.a = CoefficientSpec::make_constant(1.0);
  s.a_limit = s.a;
  s.m = CoefficientSpec::make_expression("1+0.5*sin(2*pi*{n}*x)");
  s.m_limit = CoefficientSpec::make_constant(1.0);
  s.mu = 1.0;
  const ConvergenceReport r = wot_resolvent_experiment(s, kShort);
  CHECK(r.trend_ratio("inv_gap_rel") <= 0.5);
}

TEST_CASE("compressed inverses converge weakly to multiplication by the harmonic mean") {
  const ConvergenceReport r = compressed_inverse_convergence(harmonic_family(), kSchedule);
  CHECK(r.trend_ratio("compressed_wot") <= 0.5);
  CoefficientSequence cb = harmonic_family();
  cb.a = CoefficientSpec::make_checkerboard(1.0, 4.0);
  cb.a_limit = CoefficientSpec::make_constant(1.6);
  cb.norm_cap = 4.0;
  const ConvergenceReport c = compressed_inverse_convergence(cb, {{4, 1023}, {8, 2047}, {16, 4095}});
  CHECK(c.series("harmonic_gap").back() < 1e-3);
  CHECK(c.trend_ratio("compressed_wot") <= 0.5);
}

TEST_CASE("boundary-condition independence and the adversarial mixture") {
  const std::vector<std::string> rhs{"1", "x"};
  const std::vector<std::pair<double, double>> bcs{{0.0, 1.0}, {1.0, -1.0}};
  const IndepBcReport good = indep_bc_diagnostic(harmonic_family(), rhs, bcs, kSchedule);
  CHECK_FALSE(good.diverges);
  CHECK(good.report.trend_ratio("flux_witness") <= 0.5);

  CoefficientSequence st = harmonic_family();
  st.a = CoefficientSpec::make_constant(1.5);
  st.a_limit = st.a;
  for (double w : indep_bc_diagnostic(st, rhs, bcs, kShort).report.series("flux_witness")) CHECK(w < 1e-10);

  CoefficientSequence adv = harmonic_family();
  adv.a_odd = CoefficientSpec::make_expression("1+0.5*sin(2*pi*{n}*x)");
  adv.mu = 0.4;
  const IndepBcReport bad = indep_bc_diagnostic(adv, rhs, bcs, {{4, 512}, {5, 640}, {8, 1024}, {9, 1152}});
  CHECK(bad.diverges);
}

TEST_CASE("non-coercive resolvent convergence for m_n = -5 + sin") {
  CoefficientSequence s;
  s.a = CoefficientSpec::make_constant(1.0);
  s.a_limit = s.a;
  s.m = CoefficientSpec::make_expression("-5+sin(2*pi*{n}*x)");
  s.m_limit = CoefficientSpec::make_constant(-5.0);
  s.mu = 1.0;
  const NoncoerciveReport r = noncoercive_resolvent_experiment(s, {1.0, 4.0}, kSchedule);
  CHECK(r.uniform.mu_tilde > 0.0);
  CHECK(std::isfinite(r.uniform.omega));
  CHECK(std::isfinite(r.uniform.c));
  CHECK(r.sectors_contained);
  const auto gap = r.report.series("resolvent_gap@1");
  CHECK(gap.back() <= 0.5 * gap.front());
  CHECK(r.report.series("resolvent_gap@4").size() == 4);
}

TEST_CASE("coercive m reduces to the coercive experiment") {
  CoefficientSequence s = harmonic_family();
  const NoncoerciveReport r = noncoercive_resolvent_experiment(s, {1.0}, kShort);
  CHECK(r.sectors_contained);
  CHECK(r.report.trend_ratio("resolvent_gap@1") <= 0.5);
}

TEST_CASE("kernel check aborts with a graph-mode hint") {
  CoefficientSequence s;
  s.a = CoefficientSpec::make_constant(1.0);
  s.a_limit = s.a;
  const double lam1 = oracle::discrete_dirichlet_eigenvalue(1, 1.0 / 257.0);
  s.m = CoefficientSpec::make_constant(-lam1);
  s.m_limit = s.m;
  s.mu = 1.0;
  try {
    noncoercive_resolvent_experiment(s, {1.0}, {{4, 256}});
    FAIL("expected a kernel error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("graph") != std::string::npos);
  }
}

TEST_CASE("rows are independent of the worker count") {
  setenv("DTNLAB_THREADS", "1", 1);
  CHECK(schedule_threads(8) == 1);
  const ConvergenceReport one = wot_resolvent_experiment(harmonic_family(), kShort);
  setenv("DTNLAB_THREADS", "3", 1);
  CHECK(schedule_threads(8) == 3);
  CHECK(schedule_threads(2) == 2);
  const ConvergenceReport three = wot_resolvent_experiment(harmonic_family(), kShort);
  unsetenv("DTNLAB_THREADS");
  REQUIRE(one.rows.size() == three.rows.size());
  for (std::size_t i = 0; i < one.rows.size(); ++i) {
    CHECK(one.rows[i].metric == three.rows[i].metric);
    CHECK(one.rows[i].n_osc == three.rows[i].n_osc);
    CHECK(one.rows[i].value == three.rows[i].value);
  }
}
