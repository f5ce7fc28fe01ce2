#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dtnlab/dtn.hpp"

namespace dtnlab {

/// a restricted to ran(G): R^H gram1 a R for a gram1-orthonormal basis R.
struct CompressedCoefficient {
  Eigen::Index rank = 0;
  bool full_range = false;  // ran(G) = H1, basis taken as gram1-orthonormal unit vectors
  Mat basis;                // only filled when !full_range
  SpMat compressed;         // in orthonormal coordinates of ran(G)
  SpMat inverse;
};

CompressedCoefficient compressed_coefficient(const DualPair& p, const CoefficientOp& a,
                                             const TolerancePolicy& tol = {});

/// Smallest c with ||u||_H0 <= c ||G u||_H1 on ker(G)^perp.
double poincare_constant(const DualPair& p);
/// Largest ||u|| / (c ||G u||) over seeded random u in ker(G)^perp.
double poincare_check(const DualPair& p, double c, int samples, std::uint64_t seed);

/// 1 / mean(1 / f) on [0, 1] by the periodic trapezoid rule.
double harmonic_mean(const std::function<double(double)>& f, int nodes = 4096);

struct ScheduleRow {
  int n_osc = 1;
  Eigen::Index grid_n = 0;
  bool operator==(const ScheduleRow&) const = default;
};

/// n -> (a_n, m_n) from templates with {n}, plus the homogenized limit.
struct CoefficientSequence {
  CoefficientSpec a;
  CoefficientSpec m;
  CoefficientSpec a_limit;
  CoefficientSpec m_limit;
  /// Members with odd n use these instead, when set.
  std::optional<CoefficientSpec> a_odd;
  std::optional<CoefficientSpec> m_odd;
  double mu = 0.0;
  double norm_cap = 1e6;

  /// Builds (a_n, m_n) and checks Re a_n >= mu, ||a_n|| <= norm_cap.
  std::pair<CoefficientOp, CoefficientOp> member(const DualPair& p, int n) const;
  std::pair<CoefficientOp, CoefficientOp> limit(const DualPair& p) const;
};

struct ConvergenceRow {
  int n_osc = 0;
  Eigen::Index grid_n = 0;
  double h = 0.0;
  std::string metric;
  double value = 0.0;
  double runtime_ms = 0.0;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;

  /// Values of one metric ordered by n_osc.
  std::vector<double> series(const std::string& metric) const;
  /// Final over first value of a metric.
  double trend_ratio(const std::string& metric) const;
  void sort();
};

struct ExperimentOptions {
  int random_witnesses = 8;
  std::uint64_t seed = 42;
  bool record_runtime = false;
  /// Run the constant-coefficient control on a grid twice as fine.
  bool control_run = true;
};

/// Throws ConfigError unless every row has (n_osc) / (grid_n + 1) <= 1/8.
void check_schedule(const std::vector<ScheduleRow>& schedule);

/// Gap metrics: inv_gap_rel, inv_gap, wot_witness, vector_gap, control_floor.
ConvergenceReport wot_resolvent_experiment(const CoefficientSequence& seq, const std::vector<ScheduleRow>& schedule,
                                           const ExperimentOptions& opt = {});

/// compressed_wot (fixed test functions), harmonic_gap (1D mean of 1/a_n).
ConvergenceReport compressed_inverse_convergence(const CoefficientSequence& seq,
                                                 const std::vector<ScheduleRow>& schedule,
                                                 const ExperimentOptions& opt = {});

struct IndepBcReport {
  ConvergenceReport report;  // flux_witness per row
  double first_half_max = 0.0;
  double second_half_max = 0.0;
  bool diverges = false;
};

/// Solves -D a_n G u = f with Dirichlet data phi for every (f, phi) pair and
/// tests a_n G u_n - a G u against fixed test functions.
IndepBcReport indep_bc_diagnostic(const CoefficientSequence& seq, const std::vector<std::string>& rhs_family,
                                  const std::vector<std::pair<double, double>>& bc_family,
                                  const std::vector<ScheduleRow>& schedule, const ExperimentOptions& opt = {});

struct NoncoerciveReport {
  ConvergenceReport report;  // omega_n, resolvent_gap, sector_margin
  SectorConstants uniform;
  bool sectors_contained = true;
};

/// Resolvent gaps ||(l + L_n)^{-1} - (l + L)^{-1}|| at l = omega + offset for
/// each offset, with omega uniform over the schedule.
NoncoerciveReport noncoercive_resolvent_experiment(const CoefficientSequence& seq,
                                                   const std::vector<double>& lambda_offsets,
                                                   const std::vector<ScheduleRow>& schedule,
                                                   const ExperimentOptions& opt = {});

/// Worker count for schedule rows: DTNLAB_THREADS when set, else hardware.
unsigned schedule_threads(std::size_t jobs);

}  // namespace dtnlab
