#include "dtnlab/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "dtnlab/config.hpp"
#include "dtnlab/dtn_graph.hpp"
#include "dtnlab/report.hpp"
#include "dtnlab/run.hpp"

namespace dtnlab {

using Eigen::Index;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[FAILED " << what << "] ";
    }
  }
};

std::string num(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

double spectral(const Mat& m) { return singular_values(m)(0); }

void criterion1(Outcome& o) {
  double worst_form = 0.0, worst_angle = 0.0;
  const auto check = [&](const DualPair& p, const std::string& name) {
    const PairReport r = validate_pair(p);
    o.require(r.pass(), name + " axioms");
    worst_form = std::max(worst_form, r.at("boundary_form").residual);
    worst_angle = std::max({worst_angle, r.at("kernel_trace0").residual, r.at("kernel_trace1").residual});
  };
  for (Index n : {2, 16, 256}) check(build_interval_pair(n), "interval n=" + std::to_string(n));
  for (Index n : {2, 8}) check(build_rectangle_pair(n, n), "rectangle " + std::to_string(n));
  o.require(worst_form <= 1e-12, "boundary form <= 1e-12");
  o.require(worst_angle <= 1e-10, "kernel angle <= 1e-10");
  o.detail << "boundary form " << num(worst_form) << ", kernel angle " << num(worst_angle);
}

void criterion2(Outcome& o) {
  double orth = 0.0, lbd = 0.0;
  const auto check = [&](const DualPair& p, const std::string& name) {
    const BdDiagnostics d = bd_diagnostics(p, boundary_spaces(p));
    o.require(d.dim_g == static_cast<Index>(p.boundary_nodes.size()), name + " dim BD(G)");
    orth = std::max(orth, d.orthogonality_g);
    lbd = std::max(lbd, d.relaxed_lbd_g);
  };
  for (Index n : {2, 16, 256}) check(build_interval_pair(n), "interval n=" + std::to_string(n));
  for (Index n : {2, 8}) check(build_rectangle_pair(n, n), "rectangle " + std::to_string(n));
  o.require(orth <= 1e-12, "orthogonality <= 1e-12");
  o.require(lbd <= 1e-12, "relaxed residual <= 1e-12");
  o.detail << "orthogonality " << num(orth) << ", relaxed residual " << num(lbd);
}

void criterion3(Outcome& o) {
  std::vector<double> hs;
  std::vector<std::vector<double>> defects(4);
  const std::vector<std::string> names{"strict", "unitarity", "corollary", "correspondence"};
  const auto a = [](const DualPair& p) { return constant_coefficient(p, Which::A, 1.0); };
  for (Index n : {64, 128, 256, 512}) {
    const DualPair p = build_interval_pair(n);
    const BoundarySpaces bs = boundary_spaces(p);
    const BdDiagnostics d = bd_diagnostics(p, bs);
    const auto A = a(p);
    const auto M = constant_coefficient(p, Which::M, 1.0);
    const PivotSpace piv = default_pivot(p, bs.g);
    const DtnBd bd = dtn_bd(p, bs, A, M);
    const Correspondence c = dtn_correspondence(p, bs, bd.lambda, pivot_matrix(p, A, M, piv), piv);
    hs.push_back(p.meshwidth);
    defects[0].push_back(d.strict_lbd);
    defects[1].push_back(d.unitarity);
    defects[2].push_back(d.corollary);
    defects[3].push_back(c.defect);
  }
  for (std::size_t k = 0; k < 4; ++k) {
    const double order = observed_order(hs, defects[k]);
    o.require(order >= 1.0, names[k] + " order >= 1");
    o.require(defects[k].back() <= 1e-2, names[k] + " at n=512 <= 1e-2");
    o.detail << names[k] << " " << num(defects[k].back()) << " (order " << num(order) << ") ";
  }
}

Mat analytic_dtn() {
  const double c = std::cosh(1.0) / std::sinh(1.0), s = 1.0 / std::sinh(1.0);
  Mat m(2, 2);
  m << c, -s, -s, c;
  return m;
}

void criterion4(Outcome& o) {
  const Mat exact = analytic_dtn();
  std::vector<double> hs, errs;
  double seconds = 0.0;
  for (Index n : {64, 128, 256, 512}) {
    const auto t0 = Clock::now();
    const DualPair p = build_interval_pair(n);
    const PivotSpace piv = default_pivot(p, bd_space(p, Side::G));
    const Mat lh = pivot_matrix(p, constant_coefficient(p, Which::A, 1.0), constant_coefficient(p, Which::M, 1.0), piv);
    seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    hs.push_back(p.meshwidth);
    errs.push_back(spectral(lh - exact) / spectral(exact));
  }
  const double order = observed_order(hs, errs);
  o.require(errs.back() <= 1e-3, "relative error <= 1e-3");
  o.require(std::abs(order - 2.0) <= 0.2, "order near 2");
  o.require(seconds < 1.0, "runtime < 1 s");
  o.detail << "error " << num(errs.back()) << " at n=512, order " << num(order) << ", " << num(seconds) << " s";
}

void criterion5(Outcome& o) {
  double route = 0.0, roundtrip = 0.0, herm = 0.0;
  struct Instance {
    DualPair p;
    CoefficientSpec a, m;
    bool hermitian;
  };
  std::vector<Instance> cases;
  cases.push_back({build_interval_pair(16), CoefficientSpec::make_constant(1.0), CoefficientSpec::make_constant(1.0), true});
  cases.push_back({build_interval_pair(128), CoefficientSpec::make_expression("2+sin(2*pi*x)"),
                   CoefficientSpec::make_expression("1+x"), true});
  cases.push_back({build_interval_pair(64), CoefficientSpec::make_expression("1", "0.5*sin(2*pi*x)"),
                   CoefficientSpec::make_constant(1.0), false});
  cases.push_back({build_rectangle_pair(8, 8), CoefficientSpec::make_constant(1.0), CoefficientSpec::make_constant(1.0), true});
  cases.push_back({build_rectangle_pair(6, 4), CoefficientSpec::make_expression("1+x*y"),
                   CoefficientSpec::make_constant(2.0), true});
  for (const auto& c : cases) {
    const auto a = coefficient_from_spec(c.a, c.p, Which::A);
    const auto m = coefficient_from_spec(c.m, c.p, Which::M);
    const BoundarySpaces bs = boundary_spaces(c.p);
    const DtnBd bd = dtn_bd(c.p, bs, a, m);
    route = std::max(route, bd.route_agreement);
    const Mat inv = ntd_bd(c.p, bs, a, m);
    const Index k = bd.lambda.rows();
    roundtrip = std::max(roundtrip, spectral(bd.lambda * inv - Mat::Identity(k, k)));
    const PivotSpace piv = default_pivot(c.p, bs.g);
    roundtrip = std::max(roundtrip, dtn_pivot_inverse(c.p, bs.g, a, m, piv).roundtrip);
    if (c.hermitian) herm = std::max(herm, dtn_pivot(c.p, a, m, piv).hermitian_defect);
  }
  o.require(route <= 1e-9, "route agreement <= 1e-9");
  o.require(roundtrip <= 1e-8, "inverse round trip <= 1e-8");
  o.require(herm <= 1e-10, "hermitian defect <= 1e-10");
  o.detail << "routes " << num(route) << ", round trip " << num(roundtrip) << ", hermitian " << num(herm);
}

void criterion6(Outcome& o, std::uint64_t seed) {
  const DualPair p = build_interval_pair(128);
  const auto a = coefficient_from_spec(CoefficientSpec::make_expression("1", "0.5*sin(2*pi*x)"), p, Which::A);
  const auto m = constant_coefficient(p, Which::M, 1.0);
  const PivotSpace piv = default_pivot(p, bd_space(p, Side::G));
  const Mat lh = pivot_matrix(p, a, m, piv);
  const SectorConstants sc = sector_constants(p, a, m, piv);
  const SectorReport r = sector_report(lh, piv.space, 200, seed, sc);
  o.require(r.quotients.size() >= 200, "200 samples");
  o.require(r.contained, "all quotients in the sector");
  o.detail << r.quotients.size() << " quotients, vertex " << num(sc.omega > 0.0 ? -sc.omega : 0.0) << ", half-angle " << num(sc.half_angle())
           << ", worst margin " << num(r.worst_margin);
}

void criterion7(Outcome& o, std::uint64_t seed) {
  CoefficientSequence s;
  s.a = CoefficientSpec::make_expression("2+sin(2*pi*{n}*x)");
  s.m = CoefficientSpec::make_constant(1.0);
  s.a_limit = CoefficientSpec::make_constant(std::sqrt(3.0));
  s.m_limit = s.m;
  s.mu = 1.0;
  s.norm_cap = 3.0;
  ExperimentOptions opt;
  opt.seed = seed;
  const ConvergenceReport r = wot_resolvent_experiment(s, {{4, 512}, {8, 1024}, {16, 2048}, {32, 4096}}, opt);
  const auto gap = r.series("inv_gap_rel");
  o.require(gap.back() <= 0.05, "final gap <= 0.05");
  o.require(gap.back() <= 0.5 * gap.front(), "final gap <= half the first");
  const double hm = harmonic_mean([](double y) { return 2.0 + std::sin(2.0 * kPi * y); });
  o.require(std::abs(hm - std::sqrt(3.0)) <= 1e-10, "harmonic mean = sqrt(3)");
  o.detail << "gap " << num(gap.front()) << " -> " << num(gap.back()) << ", harmonic mean error "
           << num(std::abs(hm - std::sqrt(3.0)));
}

void criterion8(Outcome& o) {
  const Index n = 64;
  const DualPair p = build_interval_pair(n);
  const double h = p.meshwidth;
  const double lambda1 = 4.0 / (h * h) * std::pow(std::sin(kPi * h / 2.0), 2);
  const auto a = constant_coefficient(p, Which::A, 1.0);
  const auto m = constant_coefficient(p, Which::M, -lambda1);
  const BoundarySpaces bs = boundary_spaces(p);
  const LinearGraph g = dtn_graph(p, bs, a, m);
  o.require(g.mul.dim() == 1, "dim mul = 1");
  Vec u1(p.n0());
  for (Index i = 0; i < p.n0(); ++i) u1(i) = std::sin(kPi * p.coords0(i, 0));
  double angle = 1.0;
  if (g.mul.dim() == 1) {
    const Subspace target{bs.d.coords(Mat(p.G * u1))};
    const Index k = target.ambient_dim();
    angle = principal_angles(g.mul, target, sparse_identity(k)).maxCoeff();
  }
  o.require(angle <= 1e-8, "mul angle <= 1e-8");
  const DomainReport dom = graph_domain_check(p, bs, a, m);
  o.require(dom.codim() == 1, "codim dom = 1");
  o.require(dom.routes_agree && dom.route_angle <= 1e-9, "domain routes agree");
  o.detail << "dim mul " << g.mul.dim() << ", mul angle " << num(angle) << ", codim " << dom.codim()
           << ", route angle " << num(dom.route_angle);
}

void criterion9(Outcome& o, std::uint64_t seed) {
  CoefficientSequence s;
  s.a = CoefficientSpec::make_constant(1.0);
  s.m = CoefficientSpec::make_expression("-5+sin(2*pi*{n}*x)");
  s.a_limit = s.a;
  s.m_limit = CoefficientSpec::make_constant(-5.0);
  s.mu = 1.0;
  s.norm_cap = 2.0;
  ExperimentOptions opt;
  opt.seed = seed;
  const NoncoerciveReport r =
      noncoercive_resolvent_experiment(s, {1.0}, {{4, 512}, {8, 1024}, {16, 2048}, {32, 4096}}, opt);
  const auto gap = r.report.series("resolvent_gap@1");
  o.require(std::isfinite(r.uniform.omega) && std::isfinite(r.uniform.c) && r.uniform.mu_tilde > 0, "finite constants");
  o.require(r.sectors_contained, "shared sector");
  o.require(gap.back() <= 0.5 * gap.front(), "final gap <= half the first");
  o.detail << "omega " << num(r.uniform.omega) << ", c " << num(r.uniform.c) << ", gap " << num(gap.front()) << " -> "
           << num(gap.back());
}

void criterion10(Outcome& o, std::uint64_t seed) {
  const DualPair p = build_interval_pair(512);
  const double c = poincare_constant(p);
  const double ratio = poincare_check(p, c, 100, seed);
  o.require(std::abs(c - 1.0 / kPi) <= 1e-3, "c within 1e-3 of 1/pi");
  o.require(ratio <= 1.0 + 1e-12, "inequality on 100 vectors");
  o.detail << "c = " << num(c) << ", worst ratio " << num(ratio);
}

const char* title(int id) {
  static const char* t[] = {"",
                            "dual-pair axioms",
                            "boundary-space decomposition",
                            "asymptotic identities",
                            "analytic DtN",
                            "structural identities",
                            "sectoriality",
                            "homogenization",
                            "non-coercive graph",
                            "non-coercive resolvent convergence",
                            "Poincare constant",
                            "determinism and CLI"};
  return id >= 1 && id <= 11 ? t[id] : "unknown";
}

}  // namespace

CriterionResult run_criterion(int id, std::uint64_t seed) {
  CriterionResult r;
  r.id = id;
  r.title = title(id);
  Outcome o;
  const auto t0 = Clock::now();
  try {
    switch (id) {
      case 1: criterion1(o); break;
      case 2: criterion2(o); break;
      case 3: criterion3(o); break;
      case 4: criterion4(o); break;
      case 5: criterion5(o); break;
      case 6: criterion6(o, seed); break;
      case 7: criterion7(o, seed); break;
      case 8: criterion8(o); break;
      case 9: criterion9(o, seed); break;
      case 10: criterion10(o, seed); break;
      default: throw ContractError("criteria 1-10 run individually");
    }
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail << "[EXCEPTION " << e.what() << "]";
  }
  r.pass = o.pass;
  r.detail = o.detail.str();
  r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return r;
}

bool determinism_check(const std::string& scratch_dir, std::uint64_t seed, std::string& detail) {
  RunConfig c;
  c.experiment.kind = "converge";
  c.experiment.mode = "wot";
  c.a = CoefficientSpec::make_expression("2+sin(2*pi*{n}*x)");
  c.experiment.a_limit = CoefficientSpec::make_constant(std::sqrt(3.0));
  c.experiment.schedule = {{2, 128}, {4, 256}};
  c.experiment.mu = 1.0;
  c.output.seed = seed;
  c.output.svg_path = "converge.svg";
  std::string csv[2];
  for (int k = 0; k < 2; ++k) {
    const std::string dir = (std::filesystem::path(scratch_dir) / ("run" + std::to_string(k))).string();
    const RunOutcome out = run(c, dir);
    if (out.exit_code != kExitOk) {
      detail = "converge run failed: " + (out.summary.empty() ? std::string() : out.summary.back());
      return false;
    }
    std::ifstream f(std::filesystem::path(dir) / "converge.csv", std::ios::binary);
    csv[k].assign(std::istreambuf_iterator<char>(f), {});
  }
  const bool same = !csv[0].empty() && csv[0] == csv[1];
  detail = same ? "identical CSVs (" + std::to_string(csv[0].size()) + " bytes)" : "CSV outputs differ";
  return same;
}

std::vector<CriterionResult> run_acceptance(std::uint64_t seed, const std::string& scratch_dir) {
  std::vector<CriterionResult> out;
  bool all = true;
  for (int id = 1; id <= 10; ++id) {
    out.push_back(run_criterion(id, seed));
    all = all && out.back().pass;
  }
  CriterionResult r;
  r.id = 11;
  r.title = title(11);
  const auto t0 = Clock::now();
  std::string detail;
  bool det = false;
  try {
    det = determinism_check(scratch_dir, seed, detail);
  } catch (const std::exception& e) {
    detail = e.what();
  }
  r.pass = all && det;
  r.detail = (all ? "criteria 1-10 pass, " : "some of criteria 1-10 fail, ") + detail;
  r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  out.push_back(r);
  return out;
}

std::string format_result(const CriterionResult& r) {
  std::ostringstream s;
  s << "criterion " << r.id << (r.id < 10 ? "  " : " ") << (r.pass ? "PASS" : "FAIL") << "  " << r.title << ": "
    << r.detail << " (" << num(r.seconds) << "s)";
  return s.str();
}

}  // namespace dtnlab
