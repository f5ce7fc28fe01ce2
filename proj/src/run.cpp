#include "dtnlab/run.hpp"

#include <filesystem>
#include <sstream>

#include "dtnlab/dtn_graph.hpp"
#include "dtnlab/report.hpp"

namespace dtnlab {

using Eigen::Index;
namespace fs = std::filesystem;

namespace {

std::string yes_no(bool b) { return b ? "true" : "false"; }

std::string resolve(const std::string& out_dir, const std::string& path) {
  const fs::path p(path);
  return p.is_absolute() ? p.string() : (fs::path(out_dir) / p).string();
}

PivotSpace make_pivot(const RunConfig& c, const DualPair& p, const BoundarySpace& bdg) {
  if (c.pivot.gram == "custom") {
    const RVec w = Eigen::Map<const RVec>(c.pivot.weights.data(), static_cast<Index>(c.pivot.weights.size()));
    return custom_pivot(p, bdg, w);
  }
  return default_pivot(p, bdg);
}

SolveOptions lenient() {
  SolveOptions o;
  o.require_coercive = false;
  return o;
}

CsvTable validate_table(const DualPair& p, RunOutcome& out) {
  CsvTable t{{"check_name", "residual", "tol", "pass"}, {}};
  const PairReport rep = validate_pair(p);
  for (const auto& ch : rep.checks)
    t.add({ch.name, format_number(ch.residual), format_number(ch.tol), yes_no(ch.pass)});
  if (!rep.pass()) {
    out.exit_code = kExitPairInvalid;
    out.summary.push_back("pair validation failed");
    return t;
  }
  const BoundarySpaces bs = boundary_spaces(p);
  const BdDiagnostics d = bd_diagnostics(p, bs);
  const auto row = [&](const std::string& name, double v, double tol) {
    t.add({name, format_number(v), format_number(tol), yes_no(v <= tol)});
  };
  row("bd_dim_g", static_cast<double>(std::abs(d.dim_g - p.b0())), 0.0);
  row("bd_dim_d", static_cast<double>(std::abs(d.dim_d - p.b1())), 0.0);
  row("bd_orthogonality_g", d.orthogonality_g, 1e-12);
  row("bd_orthogonality_d", d.orthogonality_d, 1e-12);
  row("bd_orthonormality", d.orthonormality, 1e-12);
  row("relaxed_lbd_g", d.relaxed_lbd_g, 1e-12);
  row("relaxed_lbd_d", d.relaxed_lbd_d, 1e-12);
  row("flux_identity", d.flux_identity, 1e-12);
  row("strict_lbd", d.strict_lbd, 1e-2);
  row("unitarity", d.unitarity, 1e-2);
  row("corollary", d.corollary, 1e-2);
  row("phi_vs_gdot", d.phi_vs_gdot, 1e-2);
  out.summary.push_back("pair checks passed; dim BD(G) = " + std::to_string(d.dim_g));
  return t;
}

CsvTable dtn_table(const RunConfig& c, const DualPair& p, RunOutcome& out) {
  const auto a = coefficient_from_spec(c.a, p, Which::A);
  const auto m = coefficient_from_spec(c.m, p, Which::M);
  const BoundarySpace bdg = bd_space(p, Side::G);
  const PivotSpace piv = make_pivot(c, p, bdg);
  const DtnOperator op = dtn_pivot(p, a, m, piv, c.output.seed, lenient());
  CsvTable t{{"row", "col", "re", "im"}, {}};
  for (Index i = 0; i < op.lambda_h.rows(); ++i)
    for (Index j = 0; j < op.lambda_h.cols(); ++j)
      t.add({std::to_string(i), std::to_string(j), format_number(op.lambda_h(i, j).real()),
             format_number(op.lambda_h(i, j).imag())});
  out.summary.push_back("Lambda_H is " + std::to_string(op.lambda_h.rows()) + " x " +
                        std::to_string(op.lambda_h.cols()) + ", vertex " + format_number(op.vertex) +
                        ", hermitian defect " + format_number(op.hermitian_defect));
  return t;
}

CsvTable graph_table(const RunConfig& c, const DualPair& p, RunOutcome& out) {
  const auto a = coefficient_from_spec(c.a, p, Which::A);
  const auto m = coefficient_from_spec(c.m, p, Which::M);
  const BoundarySpaces bs = boundary_spaces(p);
  const LinearGraph g = dtn_graph(p, bs, a, m);
  const DomainReport dom = graph_domain_check(p, bs, a, m);
  const DomainReport ntd = ntd_domain_check(p, bs, a, m);
  CsvTable t{{"object", "dim", "principal_angle_max"}, {}};
  const auto row = [&](const std::string& name, Index dim, double angle) {
    t.add({name, std::to_string(dim), format_number(angle)});
  };
  row("graph", g.dim(), 0.0);
  row("dom", g.dom.dim(), dom.route_angle);
  row("ran", g.ran.dim(), 0.0);
  row("mul", g.mul.dim(), g.mul_crosscheck);
  row("weak_kernel", g.dim_weak_kernel, 0.0);
  row("interior_kernel", g.dim_interior_kernel, 0.0);
  row("dom_codim", dom.codim(), dom.literal_defect);
  row("dom_inverse", ntd.dim_direct, ntd.route_angle);
  row("dom_inverse_adjoint_kernel", ntd.adjoint_kernel_dim, 0.0);
  out.summary.push_back("dim mul = " + std::to_string(g.mul.dim()) + ", codim dom = " + std::to_string(dom.codim()) +
                        ", routes agree: " + yes_no(dom.routes_agree && ntd.routes_agree));
  return t;
}

CsvTable sector_table(const RunConfig& c, const DualPair& p, RunOutcome& out) {
  const auto a = coefficient_from_spec(c.a, p, Which::A);
  const auto m = coefficient_from_spec(c.m, p, Which::M);
  const BoundarySpace bdg = bd_space(p, Side::G);
  const PivotSpace piv = make_pivot(c, p, bdg);
  const Mat lh = pivot_matrix(p, a, m, piv, lenient());
  const SectorConstants sc = sector_constants(p, a, m, piv, std::nullopt, lenient());
  const SectorReport rep = sector_report(lh, piv.space, c.experiment.samples, c.output.seed, sc);
  const double tan_theta = sc.c / sc.mu_tilde;
  CsvTable t{{"sample", "re", "im", "inside"}, {}};
  for (std::size_t k = 0; k < rep.quotients.size(); ++k) {
    const Scalar z = rep.quotients[k];
    const bool inside = std::abs(z.imag()) <= tan_theta * (z.real() + sc.omega) * (1 + 1e-12) + 1e-12;
    t.add({std::to_string(k), format_number(z.real()), format_number(z.imag()), yes_no(inside)});
  }
  out.summary.push_back("sector vertex " + format_number(sc.omega > 0.0 ? -sc.omega : 0.0) + ", half-angle " + format_number(sc.half_angle()) +
                        ", contained: " + yes_no(rep.contained));
  if (!rep.contained) out.exit_code = kExitSolver;
  return t;
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const fs::filesystem_error*>(&e)) return kExitConfig;
  return kExitSolver;
}

RunOutcome run(const RunConfig& c, const std::string& out_dir) {
  RunOutcome out;
  try {
    fs::create_directories(out_dir);
    const std::string& kind = c.experiment.kind;
    const std::string hash = config_hash(c);
    std::optional<ConvergenceReport> conv;
    CsvTable table;

    if (kind == "converge" || kind == "resolvent") {
      if (c.geometry.kind != "interval") throw ConfigError(kind + " experiments run on the interval");
      const CoefficientSequence seq = make_sequence(c);
      const ExperimentOptions opt = make_options(c);
      if (kind == "resolvent") {
        const NoncoerciveReport r = noncoercive_resolvent_experiment(seq, c.experiment.lambda_offsets, c.experiment.schedule, opt);
        conv = r.report;
        out.summary.push_back("uniform omega " + format_number(r.uniform.omega) + ", c " + format_number(r.uniform.c) +
                              ", sectors contained: " + yes_no(r.sectors_contained));
      } else if (c.experiment.mode == "compressed") {
        conv = compressed_inverse_convergence(seq, c.experiment.schedule, opt);
      } else if (c.experiment.mode == "indep_bc") {
        const IndepBcReport r = indep_bc_diagnostic(seq, c.experiment.rhs, c.experiment.bcs, c.experiment.schedule, opt);
        conv = r.report;
        out.summary.push_back(std::string("flux witnesses ") + (r.diverges ? "do not settle (divergence)" : "settle"));
      } else {
        conv = wot_resolvent_experiment(seq, c.experiment.schedule, opt);
        if (conv->series("inv_gap_rel").size() > 1)
          out.summary.push_back("inv_gap_rel trend (final / first) " + format_number(conv->trend_ratio("inv_gap_rel")));
      }
      table = convergence_table(*conv);
    } else {
      const DualPair p = build_pair(c.geometry);
      if (kind != "validate" && !validate_pair(p).pass()) {
        out.exit_code = kExitPairInvalid;
        out.summary.push_back("pair validation failed");
        return out;
      }
      if (kind == "validate") table = validate_table(p, out);
      else if (kind == "dtn") table = dtn_table(c, p, out);
      else if (kind == "graph") table = graph_table(c, p, out);
      else if (kind == "sector") table = sector_table(c, p, out);
      else throw ConfigError("unknown experiment kind '" + kind + "'");
    }

    const std::string csv = resolve(out_dir, c.output.csv_path.empty() ? kind + ".csv" : c.output.csv_path);
    write_text(csv, render_csv(table, hash));
    out.artifacts.push_back(csv);
    if (conv && c.output.svg_path) {
      const std::string svg = resolve(out_dir, *c.output.svg_path);
      write_text(svg, render_svg(*conv, kind + " (" + c.experiment.mode + ")"));
      out.artifacts.push_back(svg);
    }
  } catch (const std::exception& e) {
    out.exit_code = exit_code_for(e);
    out.summary.push_back(std::string("error: ") + e.what());
    if (dynamic_cast<const NearSingularError*>(&e)) out.summary.push_back("hint: the system is singular; use the graph experiment");
  }
  return out;
}

}  // namespace dtnlab
