#include "dtnlab/convergence.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <sstream>
#include <limits>
#include <thread>

#include <Eigen/Eigenvalues>

#include "dtnlab/expr.hpp"

namespace dtnlab {

using Eigen::Index;

namespace {

// Runs job(i) for i < n on up to schedule_threads(n) workers; rethrows the
// failure of the lowest index.
template <class Job>
void parallel_rows(std::size_t n, Job job) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned threads = schedule_threads(n);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

template <class... Args>
std::string cat(const Args&... args) {
  std::ostringstream os;
  (os << ... << args);
  return os.str();
}

struct RowTimer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }
};

void push(std::vector<ConvergenceRow>& out, const ScheduleRow& s, double h, std::string metric, double value) {
  out.push_back({s.n_osc, s.grid_n, h, std::move(metric), value, 0.0});
}

void stamp(std::vector<ConvergenceRow>& rows, const RowTimer& t, const ExperimentOptions& opt) {
  const double ms = opt.record_runtime ? t.ms() : 0.0;
  for (auto& r : rows) r.runtime_ms = ms;
}

ConvergenceReport assemble(std::vector<std::vector<ConvergenceRow>>& per_row) {
  ConvergenceReport rep;
  for (auto& rows : per_row)
    for (auto& r : rows) rep.rows.push_back(std::move(r));
  rep.sort();
  return rep;
}

// max |psi^H gram X phi| / (|phi| |psi|) over all witness pairs
double witness_max(const Mat& X, const WeightedSpace& s, const Mat& witnesses) {
  double w = 0.0;
  for (Index i = 0; i < witnesses.cols(); ++i) {
    const Vec phi = witnesses.col(i);
    const Vec xphi = X * phi;
    for (Index j = 0; j < witnesses.cols(); ++j) {
      const Vec psi = witnesses.col(j);
      w = std::max(w, std::abs(s.inner(xphi, psi)) / (s.norm(phi) * s.norm(psi)));
    }
  }
  return w;
}

Mat pivot_witnesses(Index dim, const ExperimentOptions& opt) {
  Mat w(dim, dim + opt.random_witnesses);
  w.leftCols(dim) = Mat::Identity(dim, dim);
  if (opt.random_witnesses > 0) w.rightCols(opt.random_witnesses) = seeded_gaussian(dim, opt.random_witnesses, opt.seed);
  return w;
}

// Fixed test functions on points x: cos(j pi x), j < 4, and seeded
// combinations of sin(k pi x), k = 1..4.
Mat test_functions(const RMat& coords, const ExperimentOptions& opt) {
  const Index n = coords.rows();
  const int nr = std::max(opt.random_witnesses, 0);
  Mat f(n, 4 + nr);
  const Mat c = nr > 0 ? seeded_gaussian(4, nr, opt.seed) : Mat(4, 0);
  for (Index i = 0; i < n; ++i) {
    const double x = coords(i, 0);
    for (int j = 0; j < 4; ++j) f(i, j) = std::cos(j * kPi * x);
    for (int r = 0; r < nr; ++r) {
      Scalar v = 0.0;
      for (int k = 0; k < 4; ++k) v += c(k, r) * std::sin((k + 1) * kPi * x);
      f(i, 4 + r) = v;
    }
  }
  return f;
}

struct PivotSetup {
  DualPair p;
  BoundarySpace bdg;
  PivotSpace piv;
};

PivotSetup interval_setup(Index grid_n) {
  PivotSetup s{build_interval_pair(grid_n), {}, {}};
  s.bdg = bd_space(s.p, Side::G);
  s.piv = default_pivot(s.p, s.bdg);
  return s;
}

Mat inverse(const Mat& m) { return m.fullPivLu().inverse(); }

}  // namespace

unsigned schedule_threads(std::size_t jobs) {
  unsigned cap = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("DTNLAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) cap = static_cast<unsigned>(v);
  }
  return static_cast<unsigned>(std::min<std::size_t>(cap, std::max<std::size_t>(jobs, 1)));
}

// ---------------------------------------------------------------------------

CompressedCoefficient compressed_coefficient(const DualPair& p, const CoefficientOp& a, const TolerancePolicy& tol) {
  if (a.dim() != p.n1()) throw ContractError("compressed_coefficient: a must act on H1");
  if (!a.coercive()) throw ContractError("compressed_coefficient: a must be coercive");
  CompressedCoefficient c;
  const SpMat& g1 = p.h1.gram();
  if (p.kind == "interval" && p.h1.factor().is_diagonal()) {
    // the forward difference has full row rank
    c.rank = p.n1();
    c.full_range = true;
    Vec s(p.n1());
    for (Index i = 0; i < p.n1(); ++i) s(i) = std::sqrt(g1.coeff(i, i).real());
    c.compressed = sparse_diagonal(s) * a.matrix * sparse_diagonal(s.cwiseInverse());
  } else {
    const Mat FG = p.h1.factor().apply(Mat(p.G));
    Eigen::BDCSVD<Mat> svd(FG, Eigen::ComputeThinU);
    const RVec sv = svd.singularValues();
    const double cut = tol.rank_rel_tol * (sv.size() ? sv(0) : 0.0);
    c.rank = (sv.array() > cut).count();
    const Mat U = svd.matrixU().leftCols(c.rank);
    c.full_range = c.rank == p.n1();
    // R = F^{-1} U with F^H F = g1, so R^H g1 a R = U^H F a F^{-1} U
    const Mat F = p.h1.factor().apply(Mat::Identity(p.n1(), p.n1()));
    const Mat Fa = F * Mat(a.matrix) * F.inverse();
    c.basis = F.inverse() * U;
    c.compressed = (U.adjoint() * Fa * U).sparseView(1e-300, 1.0);
  }
  const Mat dense(c.compressed);
  bool diag = true;
  for (Index j = 0; j < dense.cols() && diag; ++j)
    for (Index i = 0; i < dense.rows(); ++i)
      if (i != j && dense(i, j) != Scalar(0.0)) {
        diag = false;
        break;
      }
  if (diag) {
    c.inverse = sparse_diagonal(dense.diagonal().cwiseInverse());
  } else {
    c.inverse = inverse(dense).sparseView(1e-300, 1.0);
  }
  return c;
}

double poincare_constant(const DualPair& p) {
  const RMat A = Mat(SpMat(p.G.adjoint()) * p.h1.gram() * p.G).real();
  const RMat B = Mat(p.h0.gram()).real();
  const Index kdim = p.n0() - numeric_rank(Mat(p.G));
  Eigen::GeneralizedSelfAdjointEigenSolver<RMat> es(0.5 * (A + A.transpose()), B, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalFailure("Poincare eigensolve failed");
  if (kdim >= p.n0()) throw NumericalFailure("G vanishes identically");
  const double lmin = es.eigenvalues()(kdim);
  if (!(lmin > 0.0)) throw NumericalFailure("Poincare eigenvalue is not positive");
  return 1.0 / std::sqrt(lmin);
}

double poincare_check(const DualPair& p, double c, int samples, std::uint64_t seed) {
  const Mat K = numeric_kernel(Mat(p.G)).basis;
  const SpMat& g0 = p.h0.gram();
  Mat U = seeded_gaussian(p.n0(), samples, seed).real().cast<Scalar>();
  if (K.cols() > 0) {
    const Mat KgK = K.adjoint() * (g0 * K);
    U -= K * KgK.ldlt().solve(K.adjoint() * (g0 * U));
  }
  double worst = 0.0;
  for (Index j = 0; j < U.cols(); ++j) {
    const Vec u = U.col(j);
    worst = std::max(worst, p.h0.norm(u) / (c * p.h1.norm(p.G * u)));
  }
  return worst;
}

double harmonic_mean(const std::function<double(double)>& f, int nodes) {
  if (nodes <= 0) throw ContractError("harmonic_mean needs nodes > 0");
  double s = 0.0;
  for (int k = 0; k < nodes; ++k) s += 1.0 / f(static_cast<double>(k) / nodes);
  return nodes / s;
}

// ---------------------------------------------------------------------------

std::pair<CoefficientOp, CoefficientOp> CoefficientSequence::member(const DualPair& p, int n) const {
  const bool odd = n % 2 != 0;
  const CoefficientSpec& as = odd && a_odd ? *a_odd : a;
  const CoefficientSpec& ms = odd && m_odd ? *m_odd : m;
  auto an = coefficient_from_spec(as, p, Which::A, n);
  auto mn = coefficient_from_spec(ms, p, Which::M, n);
  if (an.hermitian_min < mu - 1e-12) {
    throw ConfigError(cat("hypothesis violated: Re a_n >= ", mu, " fails at n = ", n, " (min ", an.hermitian_min, ")"));
  }
  if (an.norm_bound > norm_cap) {
    throw ConfigError(cat("hypothesis violated: ||a_n|| = ", an.norm_bound, " exceeds the cap ", norm_cap, " at n = ", n));
  }
  return {std::move(an), std::move(mn)};
}

std::pair<CoefficientOp, CoefficientOp> CoefficientSequence::limit(const DualPair& p) const {
  return {coefficient_from_spec(a_limit, p, Which::A, 1), coefficient_from_spec(m_limit, p, Which::M, 1)};
}

std::vector<double> ConvergenceReport::series(const std::string& metric) const {
  std::vector<const ConvergenceRow*> sel;
  for (const auto& r : rows)
    if (r.metric == metric) sel.push_back(&r);
  std::stable_sort(sel.begin(), sel.end(), [](auto* x, auto* y) { return x->n_osc < y->n_osc; });
  std::vector<double> v;
  for (auto* r : sel) v.push_back(r->value);
  return v;
}

double ConvergenceReport::trend_ratio(const std::string& metric) const {
  const auto s = series(metric);
  if (s.size() < 2) throw ContractError("trend needs at least two rows of " + metric);
  return s.back() / s.front();
}

void ConvergenceReport::sort() {
  std::stable_sort(rows.begin(), rows.end(), [](const ConvergenceRow& x, const ConvergenceRow& y) {
    if (x.n_osc != y.n_osc) return x.n_osc < y.n_osc;
    return x.grid_n < y.grid_n;
  });
}

void check_schedule(const std::vector<ScheduleRow>& schedule) {
  if (schedule.empty()) throw ConfigError("schedule is empty");
  for (const auto& s : schedule) {
    if (s.n_osc < 1 || s.grid_n < 1) throw ConfigError("schedule rows need n_osc >= 1 and grid_n >= 1");
    if (8.0 * s.n_osc > static_cast<double>(s.grid_n + 1)) {
      throw ConfigError(cat("grid ", s.grid_n, " does not resolve n_osc = ", s.n_osc, " (need h * n_osc <= 1/8)"));
    }
  }
}

// ---------------------------------------------------------------------------

ConvergenceReport wot_resolvent_experiment(const CoefficientSequence& seq, const std::vector<ScheduleRow>& schedule,
                                           const ExperimentOptions& opt) {
  check_schedule(schedule);
  std::vector<std::vector<ConvergenceRow>> out(schedule.size());
  parallel_rows(schedule.size(), [&](std::size_t k) {
    const RowTimer timer;
    const ScheduleRow& s = schedule[k];
    const PivotSetup st = interval_setup(s.grid_n);
    const auto [an, mn] = seq.member(st.p, s.n_osc);
    const auto [ah, mh] = seq.limit(st.p);
    const WeightedSpace& H = st.piv.space;
    const Mat Ln = inverse(pivot_matrix(st.p, an, mn, st.piv));
    const Mat Lh = inverse(pivot_matrix(st.p, ah, mh, st.piv));
    const Mat diff = Ln - Lh;
    const double gap = weighted_operator_norm(diff, H.gram());
    const double ref = weighted_operator_norm(Lh, H.gram());

    const Mat w = pivot_witnesses(H.dim(), opt);
    // q_n = q + r / n converges to q = sum of the witnesses
    const Vec q = w.rowwise().sum();
    const Vec r = seeded_gaussian(H.dim(), 1, opt.seed + 1).col(0);
    const Vec qn = q + r / static_cast<double>(s.n_osc);
    const Vec target = Lh * q;
    const double vgap = H.norm(Ln * qn - target) / H.norm(target);

    const double h = st.p.meshwidth;
    auto& rows = out[k];
    push(rows, s, h, "inv_gap_rel", gap / ref);
    push(rows, s, h, "inv_gap", gap);
    push(rows, s, h, "wot_witness", witness_max(diff, H, w));
    push(rows, s, h, "vector_gap", vgap);
    if (opt.control_run) {
      const PivotSetup fine = interval_setup(2 * s.grid_n + 1);
      const auto [af, mf] = seq.limit(fine.p);
      const Mat Lf = inverse(pivot_matrix(fine.p, af, mf, fine.piv));
      push(rows, s, h, "control_floor", weighted_operator_norm(Lf - Lh, H.gram()) / ref);
    }
    stamp(rows, timer, opt);
  });
  return assemble(out);
}

ConvergenceReport compressed_inverse_convergence(const CoefficientSequence& seq,
                                                 const std::vector<ScheduleRow>& schedule,
                                                 const ExperimentOptions& opt) {
  check_schedule(schedule);
  std::vector<std::vector<ConvergenceRow>> out(schedule.size());
  parallel_rows(schedule.size(), [&](std::size_t k) {
    const RowTimer timer;
    const ScheduleRow& s = schedule[k];
    const DualPair p = build_interval_pair(s.grid_n);
    const CoefficientOp an = seq.member(p, s.n_osc).first;
    const CoefficientOp ah = seq.limit(p).first;
    const CompressedCoefficient cn = compressed_coefficient(p, an);
    const CompressedCoefficient ch = compressed_coefficient(p, ah);
    const SpMat diff = cn.inverse - ch.inverse;

    // test functions in orthonormal coordinates of ran(G) = H1
    const Mat phi = p.h1.factor().apply(test_functions(p.coords1, opt));
    double w = 0.0;
    for (Index i = 0; i < phi.cols(); ++i) {
      const Vec dphi = diff * phi.col(i);
      for (Index j = 0; j < phi.cols(); ++j)
        w = std::max(w, std::abs(phi.col(j).dot(dphi)) / (phi.col(i).norm() * phi.col(j).norm()));
    }
    // mean of 1 / a_n against the mean of 1 / a
    const Vec ones = Vec::Ones(p.n1());
    const double vol = p.h1.inner(ones, ones).real();
    const Vec dn = Mat(an.inverse()).diagonal();
    const Vec dh = Mat(ah.inverse()).diagonal();
    const double hgap = std::abs(p.h1.inner(dn - dh, ones)) / vol;

    auto& rows = out[k];
    push(rows, s, p.meshwidth, "compressed_wot", w);
    push(rows, s, p.meshwidth, "harmonic_gap", hgap);
    stamp(rows, timer, opt);
  });
  return assemble(out);
}

IndepBcReport indep_bc_diagnostic(const CoefficientSequence& seq, const std::vector<std::string>& rhs_family,
                                  const std::vector<std::pair<double, double>>& bc_family,
                                  const std::vector<ScheduleRow>& schedule, const ExperimentOptions& opt) {
  check_schedule(schedule);
  if (rhs_family.empty() || bc_family.empty()) throw ConfigError("indep_bc needs rhs and boundary families");
  std::vector<Expr> rhs;
  for (const auto& t : rhs_family) rhs.push_back(Expr::parse(t));

  std::vector<std::vector<ConvergenceRow>> out(schedule.size());
  parallel_rows(schedule.size(), [&](std::size_t k) {
    const RowTimer timer;
    const ScheduleRow& s = schedule[k];
    const DualPair p = build_interval_pair(s.grid_n);
    const CoefficientOp an = seq.member(p, s.n_osc).first;
    const CoefficientOp ah = seq.limit(p).first;
    const CoefficientOp zero = constant_coefficient(p, Which::M, 0.0);
    SolveOptions so;
    so.require_coercive = false;
    const DirichletSolver dn(p, an, zero, so);
    const DirichletSolver dh(p, ah, zero, so);
    const Mat psi = test_functions(p.coords1, opt);

    double worst = 0.0;
    for (const Expr& f : rhs) {
      Vec fv(p.n0());
      for (Index i = 0; i < p.n0(); ++i) fv(i) = f.eval(p.coords0(i, 0), p.coords0(i, 1));
      for (const auto& [left, right] : bc_family) {
        Vec u0(p.n0());
        for (Index i = 0; i < p.n0(); ++i) u0(i) = left * (1.0 - p.coords0(i, 0)) + right * p.coords0(i, 0);
        const Vec qn = an.matrix * (p.G * dn.solve_with_source(u0, fv));
        const Vec qh = ah.matrix * (p.G * dh.solve_with_source(u0, fv));
        for (Index j = 0; j < psi.cols(); ++j) {
          const Vec t = psi.col(j);
          worst = std::max(worst, std::abs(p.h1.inner(qn - qh, t)) / p.h1.norm(t));
        }
      }
    }
    push(out[k], s, p.meshwidth, "flux_witness", worst);
    stamp(out[k], timer, opt);
  });

  IndepBcReport rep;
  rep.report = assemble(out);
  const auto v = rep.report.series("flux_witness");
  const std::size_t half = (v.size() + 1) / 2;
  for (std::size_t i = 0; i < v.size(); ++i) {
    double& slot = i < half ? rep.first_half_max : rep.second_half_max;
    slot = std::max(slot, v[i]);
  }
  rep.diverges = v.size() >= 2 && rep.second_half_max > 0.5 * rep.first_half_max;
  return rep;
}

NoncoerciveReport noncoercive_resolvent_experiment(const CoefficientSequence& seq,
                                                   const std::vector<double>& lambda_offsets,
                                                   const std::vector<ScheduleRow>& schedule,
                                                   const ExperimentOptions& opt) {
  check_schedule(schedule);
  if (lambda_offsets.empty()) throw ConfigError("resolvent experiment needs at least one lambda offset");
  for (double d : lambda_offsets)
    if (!(d > 0.0)) throw ConfigError("lambda offsets must be positive (lambda > omega)");

  struct RowData {
    Mat ln, lh;
    SectorConstants sn, sh;
    double h = 0.0;
    double ms = 0.0;
    WeightedSpace space;
  };
  std::vector<RowData> data(schedule.size());
  SolveOptions so;
  so.require_coercive = false;
  so.near_singular_tol = 1e-8;
  const double mu_tilde = 0.5 * seq.mu;
  if (!(mu_tilde > 0.0)) throw ConfigError("non-coercive experiment needs mu > 0");

  parallel_rows(schedule.size(), [&](std::size_t k) {
    const RowTimer timer;
    const ScheduleRow& s = schedule[k];
    const PivotSetup st = interval_setup(s.grid_n);
    const auto [an, mn] = seq.member(st.p, s.n_osc);
    const auto [ah, mh] = seq.limit(st.p);
    RowData& d = data[k];
    try {
      d.ln = pivot_matrix(st.p, an, mn, st.piv, so);
      d.lh = pivot_matrix(st.p, ah, mh, st.piv, so);
    } catch (const NearSingularError&) {
      throw ConfigError(cat("interior kernel is nontrivial at n_osc = ", s.n_osc, ", grid ", s.grid_n,
                            "; run the graph experiment instead"));
    }
    d.sn = sector_constants(st.p, an, mn, st.piv, mu_tilde, so);
    d.sh = sector_constants(st.p, ah, mh, st.piv, mu_tilde, so);
    d.h = st.p.meshwidth;
    d.space = st.piv.space;
    d.ms = timer.ms();
  });

  NoncoerciveReport rep;
  rep.uniform.mu_tilde = mu_tilde;
  for (const auto& d : data) {
    rep.uniform.omega = std::max({rep.uniform.omega, d.sn.omega, d.sh.omega});
    rep.uniform.c = std::max({rep.uniform.c, d.sn.c, d.sh.c});
  }
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    const RowData& d = data[k];
    const ScheduleRow& s = schedule[k];
    std::vector<ConvergenceRow> rows;
    push(rows, s, d.h, "omega_n", d.sn.omega);
    const Index n = d.ln.rows();
    for (double off : lambda_offsets) {
      const double lambda = rep.uniform.omega + off;
      const Mat I = Mat::Identity(n, n);
      const Mat gap = inverse(lambda * I + d.ln) - inverse(lambda * I + d.lh);
      push(rows, s, d.h, cat("resolvent_gap@", off), weighted_operator_norm(gap, d.space.gram()));
    }
    const SectorReport sr = sector_report(d.ln, d.space, 200, opt.seed + k, rep.uniform);
    rep.sectors_contained = rep.sectors_contained && sr.contained;
    push(rows, s, d.h, "sector_margin", sr.worst_margin);
    for (auto& r : rows) r.runtime_ms = opt.record_runtime ? d.ms : 0.0;
    for (auto& r : rows) rep.report.rows.push_back(std::move(r));
  }
  rep.report.sort();
  return rep;
}

}  // namespace dtnlab
