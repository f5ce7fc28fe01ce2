#include "dtnlab/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dtnlab {

using Eigen::Index;

void TolerancePolicy::validate() const {
  if (!(rank_rel_tol > 0.0) || !(identity_tol > 0.0) || asymptotic_order_window <= 0) {
    throw ConfigError("tolerance policy: all tolerances must be strictly positive");
  }
}

namespace {

bool is_diagonal_matrix(const SpMat& m) {
  for (Index k = 0; k < m.outerSize(); ++k) {
    for (SpMat::InnerIterator it(m, k); it; ++it) {
      if (it.row() != it.col() && it.value() != Scalar(0)) return false;
    }
  }
  return true;
}

double frobenius(const SpMat& m) {
  double s = 0.0;
  for (Index k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it) s += std::norm(it.value());
  return std::sqrt(s);
}

// Reproducible column phase: first entry above 1e-12 * max becomes real positive.
void fix_phases(Mat& Q) {
  for (Index j = 0; j < Q.cols(); ++j) {
    const double cmax = Q.col(j).cwiseAbs().maxCoeff();
    if (cmax == 0.0) continue;
    for (Index i = 0; i < Q.rows(); ++i) {
      const double mag = std::abs(Q(i, j));
      if (mag > 1e-12 * cmax) {
        Q.col(j) *= std::conj(Q(i, j)) / mag;
        break;
      }
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// GramFactor

GramFactor::GramFactor(const SpMat& gram) {
  if (gram.rows() != gram.cols()) throw ContractError("gram matrix must be square");
  const Index n = gram.rows();
  if (is_diagonal_matrix(gram)) {
    diagonal_ = true;
    diag_.resize(n);
    for (Index i = 0; i < n; ++i) {
      const Scalar d = gram.coeff(i, i);
      if (std::abs(d.imag()) > 1e-13 * std::abs(d.real()) || !(d.real() > 0.0)) {
        throw ContractError("gram matrix is not positive definite");
      }
      diag_(i) = d.real();
    }
    min_pivot_ = n ? diag_.minCoeff() : 0.0;
    return;
  }
  auto ldlt = std::make_shared<Eigen::SimplicialLDLT<SpMat>>(gram);
  if (ldlt->info() != Eigen::Success) throw ContractError("gram matrix factorization failed");
  const Vec d = ldlt->vectorD();
  min_pivot_ = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < d.size(); ++i) {
    if (!(d(i).real() > 0.0)) throw ContractError("gram matrix is not positive definite");
    min_pivot_ = std::min(min_pivot_, d(i).real());
  }
  ldlt_ = std::move(ldlt);
}

Mat GramFactor::apply(const Mat& x) const {
  if (diagonal_) return diag_.cwiseSqrt().asDiagonal() * x;
  // F = sqrt(D) L^H P  with  P^{-1} L D L^H P = K
  Mat y = ldlt_->permutationP() * x;
  y = ldlt_->matrixU() * y;
  const Vec d = ldlt_->vectorD();
  for (Index i = 0; i < y.rows(); ++i) y.row(i) *= std::sqrt(d(i).real());
  return y;
}

Mat GramFactor::solve(const Mat& b) const {
  if (diagonal_) return diag_.cwiseInverse().asDiagonal() * b;
  return ldlt_->solve(b);
}

// ---------------------------------------------------------------------------
// WeightedSpace

WeightedSpace::WeightedSpace(SpMat gram) : gram_(std::move(gram)) {
  gram_.makeCompressed();
  if (gram_.rows() != gram_.cols() || gram_.rows() == 0) {
    throw ContractError("weighted space: gram must be a nonempty square matrix");
  }
  const SpMat herm_defect = gram_ - SpMat(gram_.adjoint());
  const double scale = frobenius(gram_);
  if (frobenius(herm_defect) > 1e-13 * scale) {
    throw ContractError("weighted space: gram is not Hermitian");
  }
  factor_ = std::make_shared<const GramFactor>(gram_);
}

WeightedSpace WeightedSpace::euclidean(Index dim) { return WeightedSpace(sparse_identity(dim)); }

WeightedSpace WeightedSpace::diagonal(const RVec& weights) {
  return WeightedSpace(sparse_diagonal(weights.cast<Scalar>()));
}

Scalar WeightedSpace::inner(const Vec& x, const Vec& y) const { return y.dot(gram_ * x); }

double WeightedSpace::norm(const Vec& x) const { return std::sqrt(std::max(0.0, inner(x, x).real())); }

// ---------------------------------------------------------------------------
// adjoints, kernels, ranks

Mat weighted_adjoint(const Mat& A, const WeightedSpace& from, const WeightedSpace& to) {
  if (A.rows() != to.dim() || A.cols() != from.dim()) {
    throw ContractError("weighted_adjoint: matrix shape does not match the spaces");
  }
  const Mat rhs = A.adjoint() * to.gram();
  return from.solve(rhs);
}

SpMat weighted_adjoint(const SpMat& A, const WeightedSpace& from, const WeightedSpace& to) {
  if (A.rows() != to.dim() || A.cols() != from.dim()) {
    throw ContractError("weighted_adjoint: matrix shape does not match the spaces");
  }
  const SpMat rhs = SpMat(A.adjoint()) * to.gram();
  if (from.factor().is_diagonal()) {
    SpMat inv = from.gram();
    for (Index k = 0; k < inv.outerSize(); ++k)
      for (SpMat::InnerIterator it(inv, k); it; ++it) it.valueRef() = Scalar(1) / it.value();
    SpMat out = inv * rhs;
    out.makeCompressed();
    return out;
  }
  const Mat dense = from.solve(Mat(rhs));
  return dense.sparseView(1.0, 1e-300);
}

RVec singular_values(const Mat& A) {
  if (A.size() == 0) return RVec();
  Eigen::BDCSVD<Mat> svd(A);
  return svd.singularValues();
}

Subspace numeric_kernel(const Mat& A, const TolerancePolicy& tol) {
  const Index n = A.cols();
  if (n == 0) return {Mat(0, 0)};
  if (A.rows() == 0) return {Mat::Identity(n, n)};
  Eigen::BDCSVD<Mat> svd(A, Eigen::ComputeFullV);
  const RVec& s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  Index rank = 0;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > tol.rank_rel_tol * smax && smax > 0.0) ++rank;
  Mat basis = svd.matrixV().rightCols(n - rank);
  fix_phases(basis);
  return {basis};
}

Index numeric_rank(const Mat& A, const TolerancePolicy& tol) {
  if (A.size() == 0) return 0;
  const RVec s = singular_values(A);
  const double smax = s(0);
  if (smax == 0.0) return 0;
  return static_cast<Index>((s.array() > tol.rank_rel_tol * smax).count());
}

SpMat sparse_kernel_basis(const SpMat& A, const TolerancePolicy& tol) {
  const Index ncols = A.cols();
  std::vector<Index> parent(ncols);
  std::iota(parent.begin(), parent.end(), Index{0});
  auto find = [&](Index x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  // row-major view to walk row supports
  Eigen::SparseMatrix<Scalar, Eigen::RowMajor> R = A;
  std::vector<char> touched(ncols, 0);
  for (Index r = 0; r < R.outerSize(); ++r) {
    Index first = -1;
    for (decltype(R)::InnerIterator it(R, r); it; ++it) {
      if (it.value() == Scalar(0)) continue;
      touched[it.col()] = 1;
      if (first < 0) first = it.col();
      else parent[find(it.col())] = find(first);
    }
  }
  // group rows and columns per component
  std::vector<std::vector<Index>> comp_cols(ncols), comp_rows(ncols);
  for (Index c = 0; c < ncols; ++c)
    if (touched[c]) comp_cols[find(c)].push_back(c);
  for (Index r = 0; r < R.outerSize(); ++r) {
    for (decltype(R)::InnerIterator it(R, r); it; ++it) {
      if (it.value() == Scalar(0)) continue;
      comp_rows[find(it.col())].push_back(r);
      break;
    }
  }
  struct Column {
    Index lead;
    std::vector<std::pair<Index, Scalar>> entries;
  };
  std::vector<Column> columns;
  for (Index c = 0; c < ncols; ++c) {
    if (!touched[c]) {
      columns.push_back({c, {{c, Scalar(1)}}});
      continue;
    }
    if (find(c) != c || comp_cols[c].empty()) continue;
    const auto& cols = comp_cols[c];
    const auto& rows = comp_rows[c];
    Mat local(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < cols.size(); ++j) local(i, j) = A.coeff(rows[i], cols[j]);
    const Subspace ker = numeric_kernel(local, tol);
    for (Index k = 0; k < ker.dim(); ++k) {
      Column col{cols.front(), {}};
      for (std::size_t j = 0; j < cols.size(); ++j)
        if (std::abs(ker.basis(j, k)) > 1e-15) col.entries.emplace_back(cols[j], ker.basis(j, k));
      columns.push_back(std::move(col));
    }
  }
  std::stable_sort(columns.begin(), columns.end(),
                   [](const Column& a, const Column& b) { return a.lead < b.lead; });
  std::vector<Triplet> trip;
  for (std::size_t k = 0; k < columns.size(); ++k)
    for (const auto& [row, v] : columns[k].entries) trip.emplace_back(row, static_cast<Index>(k), v);
  SpMat out(ncols, static_cast<Index>(columns.size()));
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

// ---------------------------------------------------------------------------
// orthonormalization and projections

Mat orthonormalize(const Mat& X, const GramFactor& factor, const TolerancePolicy& tol) {
  if (X.cols() == 0) return X;
  Mat Q = X;
  for (int pass = 0; pass < 2; ++pass) {
    const Mat Y = factor.apply(Q);
    Eigen::HouseholderQR<Mat> qr(Y);
    const Mat R = qr.matrixQR().topRows(Q.cols()).triangularView<Eigen::Upper>();
    if (pass == 0) {
      const RVec s = singular_values(R);
      if (!(s(0) > 0.0) || s(s.size() - 1) <= tol.rank_rel_tol * s(0)) {
        throw DegenerateSubspaceError("basis is rank deficient in the given inner product");
      }
    }
    Q = R.triangularView<Eigen::Upper>().solve<Eigen::OnTheRight>(Q);
  }
  fix_phases(Q);
  return Q;
}

Mat orthonormalize(const Mat& X, const SpMat& gram, const TolerancePolicy& tol) {
  return orthonormalize(X, GramFactor(gram), tol);
}

Mat orthogonal_projection(const Subspace& target, const SpMat& gram, const TolerancePolicy& tol) {
  const Index n = gram.rows();
  if (target.ambient_dim() != n) throw ContractError("projection: subspace/gram size mismatch");
  if (target.dim() == 0) return Mat::Zero(n, n);
  const Mat Q = orthonormalize(target.basis, gram, tol);
  return Q * (Q.adjoint() * gram);
}

RVec principal_angles(const Subspace& U, const Subspace& V, const SpMat& gram) {
  if (U.ambient_dim() != V.ambient_dim() || U.ambient_dim() != gram.rows()) {
    throw ContractError("principal_angles: subspaces live in different spaces");
  }
  if (U.dim() == 0 || V.dim() == 0) return RVec();
  const GramFactor F(gram);
  Mat FU = F.apply(orthonormalize(U.basis, F));
  Mat FV = F.apply(orthonormalize(V.basis, F));
  if (FU.cols() < FV.cols()) std::swap(FU, FV);
  const Mat C = FU.adjoint() * FV;
  const RVec cosv = singular_values(C);
  const Mat resid = FV - FU * C;
  const RVec sinv = singular_values(resid);
  const Index k = FV.cols();
  RVec angles(k);
  for (Index i = 0; i < k; ++i) {
    // i-th smallest angle: i-th largest cosine, i-th smallest sine
    const double c = std::min(1.0, cosv(i));
    const double s = std::min(1.0, sinv(k - 1 - i));
    angles(i) = (c * c > 0.5) ? std::asin(s) : std::acos(c);
  }
  return angles.reverse();
}

double subspace_distance(const Subspace& U, const Subspace& V, const SpMat& gram) {
  if (U.dim() != V.dim()) return kPi / 2;
  if (U.dim() == 0) return 0.0;
  return principal_angles(U, V, gram).maxCoeff();
}

namespace {

// F M F^{-1}, the matrix of M in gram-orthonormal coordinates
Mat to_orthonormal_coordinates(const Mat& M, const SpMat& gram) {
  const Index n = gram.rows();
  const GramFactor F(gram);
  const Mat Finv = F.solve(F.apply(Mat::Identity(n, n)).adjoint());  // K^{-1} F^H = F^{-1}
  return F.apply(M) * Finv;
}

}  // namespace

double hermitian_part_min(const Mat& M, const SpMat& gram) {
  const Mat Mt = to_orthonormal_coordinates(M, gram);
  const Mat H = 0.5 * (Mt + Mt.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> es(H, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double weighted_operator_norm(const Mat& M, const SpMat& gram) {
  const RVec s = singular_values(to_orthonormal_coordinates(M, gram));
  return s.size() ? s(0) : 0.0;
}

SingularValueEstimate estimate_singular_values(const SpMat& A, int iterations) {
  if (A.rows() != A.cols()) throw ContractError("estimate_singular_values: square matrix required");
  SingularValueEstimate est;
  const Index n = A.rows();
  if (n == 0) return est;
  Vec start(n);
  for (Index i = 0; i < n; ++i) start(i) = Scalar(1.0 + 0.37 * std::sin(1.7 * i + 0.3), 0.11 * std::cos(0.9 * i));
  start.normalize();

  Vec x = start;
  double lam = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Vec y = A.adjoint() * (A * x);
    lam = x.dot(y).real();
    const double ny = y.norm();
    if (ny == 0.0) break;
    x = y / ny;
  }
  est.sigma_max = std::sqrt(lam);

  SpMat Ac = A;
  Ac.makeCompressed();
  Eigen::SparseLU<SpMat> lu;
  lu.compute(Ac);
  if (lu.info() != Eigen::Success) {
    est.factorization_failed = true;
    est.sigma_min = 0.0;
    return est;
  }
  x = start;
  double mu = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Vec y = lu.adjoint().solve(x);
    Vec z = lu.solve(y);
    mu = x.dot(z).real();
    const double nz = z.norm();
    if (!std::isfinite(nz)) {
      est.sigma_min = 0.0;
      return est;
    }
    x = z / nz;
  }
  est.sigma_min = mu > 0.0 ? 1.0 / std::sqrt(mu) : 0.0;
  return est;
}

double observed_order(std::span<const double> h, std::span<const double> err) {
  if (h.size() != err.size() || h.size() < 2) throw ContractError("observed_order: need >= 2 samples");
  const double n = static_cast<double>(h.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double lx = std::log(h[i]);
    const double ly = std::log(err[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// ---------------------------------------------------------------------------
// sparse assembly helpers

SpMat sparse_identity(Index n) {
  SpMat I(n, n);
  I.setIdentity();
  return I;
}

SpMat sparse_diagonal(const Vec& d) {
  std::vector<Triplet> t;
  t.reserve(d.size());
  for (Index i = 0; i < d.size(); ++i) t.emplace_back(i, i, d(i));
  SpMat m(d.size(), d.size());
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

SpMat kron(const SpMat& A, const SpMat& B) {
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(A.nonZeros() * B.nonZeros()));
  for (Index ka = 0; ka < A.outerSize(); ++ka)
    for (SpMat::InnerIterator ia(A, ka); ia; ++ia)
      for (Index kb = 0; kb < B.outerSize(); ++kb)
        for (SpMat::InnerIterator ib(B, kb); ib; ++ib)
          t.emplace_back(ia.row() * B.rows() + ib.row(), ia.col() * B.cols() + ib.col(),
                         ia.value() * ib.value());
  SpMat m(A.rows() * B.rows(), A.cols() * B.cols());
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

SpMat hstack(const SpMat& A, const SpMat& B) {
  if (A.rows() != B.rows()) throw ContractError("hstack: row mismatch");
  std::vector<Triplet> t;
  for (Index k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  for (Index k = 0; k < B.outerSize(); ++k)
    for (SpMat::InnerIterator it(B, k); it; ++it) t.emplace_back(it.row(), A.cols() + it.col(), it.value());
  SpMat m(A.rows(), A.cols() + B.cols());
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

SpMat vstack(const SpMat& A, const SpMat& B) {
  if (A.cols() != B.cols()) throw ContractError("vstack: column mismatch");
  std::vector<Triplet> t;
  for (Index k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  for (Index k = 0; k < B.outerSize(); ++k)
    for (SpMat::InnerIterator it(B, k); it; ++it) t.emplace_back(A.rows() + it.row(), it.col(), it.value());
  SpMat m(A.rows() + B.rows(), A.cols());
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

SpMat selection(const std::vector<Index>& idx, Index n) {
  std::vector<Triplet> t;
  for (std::size_t k = 0; k < idx.size(); ++k) t.emplace_back(static_cast<Index>(k), idx[k], Scalar(1));
  SpMat m(static_cast<Index>(idx.size()), n);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

}  // namespace dtnlab
