#include "dtnlab/dual_pair.hpp"

#include <algorithm>
#include <cmath>

namespace dtnlab {

using Eigen::Index;

namespace {

// One-dimensional staggered factors on [0, 1] with n interior nodes.
struct Line {
  Index n0, n1;
  double h;
  RVec w0, w1;
  SpMat G, D, T0, T1, beta;
};

Line make_line(Index n) {
  Line L;
  L.n0 = n + 2;
  L.n1 = n + 1;
  L.h = 1.0 / static_cast<double>(n + 1);
  const double h = L.h;
  L.w0 = RVec::Constant(L.n0, h);
  L.w0(0) = L.w0(L.n0 - 1) = 0.5 * h;
  L.w1 = RVec::Constant(L.n1, h);

  std::vector<Triplet> t;
  for (Index i = 0; i < L.n1; ++i) {
    t.emplace_back(i, i, -1.0 / h);
    t.emplace_back(i, i + 1, 1.0 / h);
  }
  L.G.resize(L.n1, L.n0);
  L.G.setFromTriplets(t.begin(), t.end());

  t.clear();
  t.emplace_back(0, 0, 1.0);
  t.emplace_back(1, L.n0 - 1, 1.0);
  L.T0.resize(2, L.n0);
  L.T0.setFromTriplets(t.begin(), t.end());

  // linear extrapolation of the face field to x = 0 and x = 1
  t.clear();
  t.emplace_back(0, 0, 1.5);
  t.emplace_back(0, 1, -0.5);
  t.emplace_back(1, L.n1 - 1, 1.5);
  t.emplace_back(1, L.n1 - 2, -0.5);
  L.T1.resize(2, L.n1);
  L.T1.setFromTriplets(t.begin(), t.end());

  Vec b(2);
  b << -1.0, 1.0;
  L.beta = sparse_diagonal(b);

  // D = gram0^{-1} (T0^H beta T1 - G^H gram1)
  const SpMat rhs = SpMat(L.T0.adjoint()) * L.beta * L.T1 - SpMat(L.G.adjoint()) * sparse_diagonal(L.w1.cast<Scalar>());
  L.D = sparse_diagonal(L.w0.cwiseInverse().cast<Scalar>()) * rhs;
  L.D.prune(Scalar(0));
  return L;
}

SpMat diag_sp(const RVec& w) { return sparse_diagonal(w.cast<Scalar>()); }

double max_abs(const SpMat& m) {
  double r = 0.0;
  for (Index k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it) r = std::max(r, std::abs(it.value()));
  return r;
}

}  // namespace

SpMat boundary_form(const DualPair& p) {
  SpMat bf = SpMat(p.G.adjoint()) * p.h1.gram() + p.h0.gram() * p.D;
  return bf;
}

DualPair build_interval_pair(Index n) {
  if (n < 1) throw ConfigError("interval pair needs at least one interior node");
  const Line L = make_line(n);
  DualPair p;
  p.kind = "interval";
  p.nx = n;
  p.ny = 0;
  p.meshwidth = L.h;
  p.h0 = WeightedSpace(diag_sp(L.w0));
  p.h1 = WeightedSpace(diag_sp(L.w1));
  p.G = L.G;
  p.D = L.D;
  p.trace0 = L.T0;
  p.trace1 = L.T1;
  p.beta = L.beta;

  std::vector<Index> inner(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) inner[static_cast<std::size_t>(i)] = i + 1;
  p.interior0 = SpMat(selection(inner, L.n0).transpose());
  p.interior1 = sparse_kernel_basis(L.T1);

  p.coords0 = RMat::Zero(L.n0, 2);
  for (Index i = 0; i < L.n0; ++i) p.coords0(i, 0) = static_cast<double>(i) * L.h;
  p.coords1 = RMat::Zero(L.n1, 2);
  for (Index i = 0; i < L.n1; ++i) p.coords1(i, 0) = (static_cast<double>(i) + 0.5) * L.h;
  p.face_family.assign(static_cast<std::size_t>(L.n1), 0);
  p.boundary_weights = RVec::Ones(2);
  p.boundary_nodes = {0, L.n0 - 1};
  return p;
}

DualPair build_rectangle_pair(Index nx, Index ny) {
  if (nx < 1 || ny < 1) throw ConfigError("rectangle pair needs nx, ny >= 1");
  const Line X = make_line(nx);
  const Line Y = make_line(ny);
  const SpMat W0x = diag_sp(X.w0), W0y = diag_sp(Y.w0);
  const SpMat W1x = diag_sp(X.w1), W1y = diag_sp(Y.w1);
  const SpMat Ix = sparse_identity(X.n0), Iy = sparse_identity(Y.n0);

  DualPair p;
  p.kind = "rectangle";
  p.nx = nx;
  p.ny = ny;
  p.meshwidth = std::max(X.h, Y.h);

  // node (ix, iy) has index ix * Y.n0 + iy
  const Index n0 = X.n0 * Y.n0;
  const Index nfx = X.n1 * Y.n0;
  const Index nfy = X.n0 * Y.n1;
  p.h0 = WeightedSpace(kron(W0x, W0y));
  RVec w1(nfx + nfy);
  for (Index i = 0; i < X.n1; ++i)
    for (Index j = 0; j < Y.n0; ++j) w1(i * Y.n0 + j) = X.w1(i) * Y.w0(j);
  for (Index i = 0; i < X.n0; ++i)
    for (Index j = 0; j < Y.n1; ++j) w1(nfx + i * Y.n1 + j) = X.w0(i) * Y.w1(j);
  p.h1 = WeightedSpace(diag_sp(w1));

  p.G = vstack(kron(X.G, Iy), kron(Ix, Y.G));
  p.D = hstack(kron(X.D, Iy), kron(Ix, Y.D));

  std::vector<Index> bnodes, inner;
  RVec bw(2 * (nx + ny) + 4);
  for (Index i = 0; i < X.n0; ++i) {
    for (Index j = 0; j < Y.n0; ++j) {
      const bool ex = (i == 0 || i == X.n0 - 1);
      const bool ey = (j == 0 || j == Y.n0 - 1);
      if (!ex && !ey) {
        inner.push_back(i * Y.n0 + j);
        continue;
      }
      double w;
      if (ex && ey) w = 0.5 * (X.h + Y.h);
      else if (ex) w = Y.h;
      else w = X.h;
      bw(static_cast<Index>(bnodes.size())) = w;
      bnodes.push_back(i * Y.n0 + j);
    }
  }
  p.trace0 = selection(bnodes, n0);
  p.interior0 = SpMat(selection(inner, n0).transpose());
  p.boundary_weights = bw;
  p.boundary_nodes = bnodes;
  p.beta = diag_sp(bw);

  // outward normal flux per boundary node, corners average both sides
  const SpMat Rx = SpMat(X.T0.adjoint()) * X.beta * X.T1;
  const SpMat Ry = SpMat(Y.T0.adjoint()) * Y.beta * Y.T1;
  const SpMat R = hstack(kron(Rx, W0y), kron(W0x, Ry));
  p.trace1 = diag_sp(bw.cwiseInverse()) * p.trace0 * R;
  p.trace1.prune(Scalar(0));
  p.interior1 = sparse_kernel_basis(p.trace1);

  p.coords0 = RMat::Zero(n0, 2);
  for (Index i = 0; i < X.n0; ++i)
    for (Index j = 0; j < Y.n0; ++j) {
      p.coords0(i * Y.n0 + j, 0) = static_cast<double>(i) * X.h;
      p.coords0(i * Y.n0 + j, 1) = static_cast<double>(j) * Y.h;
    }
  p.coords1 = RMat::Zero(nfx + nfy, 2);
  p.face_family.assign(static_cast<std::size_t>(nfx + nfy), 0);
  for (Index i = 0; i < X.n1; ++i)
    for (Index j = 0; j < Y.n0; ++j) {
      p.coords1(i * Y.n0 + j, 0) = (static_cast<double>(i) + 0.5) * X.h;
      p.coords1(i * Y.n0 + j, 1) = static_cast<double>(j) * Y.h;
    }
  for (Index i = 0; i < X.n0; ++i)
    for (Index j = 0; j < Y.n1; ++j) {
      const Index k = nfx + i * Y.n1 + j;
      p.coords1(k, 0) = static_cast<double>(i) * X.h;
      p.coords1(k, 1) = (static_cast<double>(j) + 0.5) * Y.h;
      p.face_family[static_cast<std::size_t>(k)] = 1;
    }
  return p;
}

bool PairReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

const CheckResult& PairReport::at(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw ContractError("no check named " + name);
}

namespace {

CheckResult check(std::string name, double residual, double tol) {
  return {std::move(name), residual, tol, std::isfinite(residual) && residual <= tol};
}

double kernel_angle(const SpMat& interior, const SpMat& trace, const SpMat& gram, const TolerancePolicy& tol) {
  const Subspace ker = numeric_kernel(Mat(trace), tol);
  const Subspace in{Mat(interior)};
  if (ker.dim() != in.dim()) return kPi / 2;
  if (in.dim() == 0) return 0.0;
  try {
    return subspace_distance(in, ker, gram);
  } catch (const DegenerateSubspaceError&) {
    return kPi / 2;
  }
}

double rank_deficiency(const SpMat& trace, const TolerancePolicy& tol) {
  if (trace.rows() == 0) return 0.0;
  return static_cast<double>(trace.rows() - numeric_rank(Mat(trace), tol));
}

}  // namespace

PairReport validate_pair(const DualPair& p, const TolerancePolicy& tol) {
  PairReport r;
  const auto gram_check = [&](const char* name, const WeightedSpace& s) {
    const SpMat defect = s.gram() - SpMat(s.gram().adjoint());
    const double herm = max_abs(defect) / std::max(max_abs(s.gram()), 1e-300);
    const bool pd = s.factor().min_pivot() > 0.0;
    r.checks.push_back(check(name, pd ? herm : 1.0, 1e-13));
  };
  gram_check("gram0_spd", p.h0);
  gram_check("gram1_spd", p.h1);

  const SpMat lhs = boundary_form(p);
  const SpMat rhs = SpMat(p.trace0.adjoint()) * p.beta * p.trace1;
  const double scale = std::max({max_abs(SpMat(SpMat(p.G.adjoint()) * p.h1.gram())),
                                 max_abs(SpMat(p.h0.gram() * p.D)), 1e-300});
  r.checks.push_back(check("boundary_form", max_abs(SpMat(lhs - rhs)) / scale, 1e-12));

  r.checks.push_back(check("kernel_trace0", kernel_angle(p.interior0, p.trace0, p.h0.gram(), tol), 1e-10));
  r.checks.push_back(check("kernel_trace1", kernel_angle(p.interior1, p.trace1, p.h1.gram(), tol), 1e-10));
  r.checks.push_back(check("trace0_surjective", rank_deficiency(p.trace0, tol), 0.0));
  r.checks.push_back(check("trace1_surjective", rank_deficiency(p.trace1, tol), 0.0));

  // (G u, q) + (u, D q) on interior arguments
  r.checks.push_back(check("skew_interior0", max_abs(SpMat(SpMat(p.interior0.adjoint()) * lhs)) / scale, 1e-12));
  r.checks.push_back(check("skew_interior1", max_abs(SpMat(lhs * p.interior1)) / scale, 1e-12));
  return r;
}

}  // namespace dtnlab
