#pragma once

#include <memory>
#include <span>
#include <vector>

#include "dtnlab/types.hpp"

namespace dtnlab {

struct TolerancePolicy {
  double rank_rel_tol = 1e-10;
  double identity_tol = 1e-11;
  int asymptotic_order_window = 3;

  /// Throws ConfigError unless every tolerance is strictly positive.
  void validate() const;
};

/// Factor F with F^H F = K for a sparse Hermitian positive definite K, so that
/// weighted norms become Euclidean: ||x||_K = ||F x||.
class GramFactor {
 public:
  explicit GramFactor(const SpMat& gram);

  Mat apply(const Mat& x) const;
  Mat solve(const Mat& b) const;
  bool is_diagonal() const noexcept { return diagonal_; }
  double min_pivot() const noexcept { return min_pivot_; }

 private:
  bool diagonal_ = false;
  RVec diag_;
  double min_pivot_ = 0.0;
  std::shared_ptr<const Eigen::SimplicialLDLT<SpMat>> ldlt_;
};

/// Finite-dimensional inner-product space: C^dim with (x, y) = y^H gram x.
class WeightedSpace {
 public:
  WeightedSpace() = default;
  /// Validates that gram is Hermitian (1e-13 relative) and positive definite.
  explicit WeightedSpace(SpMat gram);

  static WeightedSpace euclidean(Eigen::Index dim);
  static WeightedSpace diagonal(const RVec& weights);

  Eigen::Index dim() const noexcept { return gram_.rows(); }
  const SpMat& gram() const noexcept { return gram_; }
  const GramFactor& factor() const noexcept { return *factor_; }

  Scalar inner(const Vec& x, const Vec& y) const;
  double norm(const Vec& x) const;
  /// gram^{-1} b
  Mat solve(const Mat& b) const { return factor_->solve(b); }

 private:
  SpMat gram_;
  std::shared_ptr<const GramFactor> factor_;
};

/// Column span of a (full column rank) basis inside C^rows.
struct Subspace {
  Mat basis;

  Eigen::Index dim() const noexcept { return basis.cols(); }
  Eigen::Index ambient_dim() const noexcept { return basis.rows(); }
};

/// A^dagger with (A x, y)_to = (x, A^dagger y)_from, i.e. gram_from^{-1} A^H gram_to.
Mat weighted_adjoint(const Mat& A, const WeightedSpace& from, const WeightedSpace& to);
SpMat weighted_adjoint(const SpMat& A, const WeightedSpace& from, const WeightedSpace& to);

/// Euclidean-orthonormal basis of the right null space; singular values below
/// rank_rel_tol * sigma_max count as zero.
Subspace numeric_kernel(const Mat& A, const TolerancePolicy& tol = {});
Eigen::Index numeric_rank(const Mat& A, const TolerancePolicy& tol = {});
RVec singular_values(const Mat& A);

/// Kernel basis of a sparse matrix whose rows have small, mostly disjoint
/// supports: untouched columns give unit vectors, every connected block of
/// rows/columns contributes a dense local null space.
SpMat sparse_kernel_basis(const SpMat& A, const TolerancePolicy& tol = {});

/// gram-orthonormal basis of span(X) (Householder QR on the weighted basis,
/// applied twice). Columns get a reproducible phase: the first entry of
/// magnitude above 1e-12 * column max is made real positive.
/// Throws DegenerateSubspaceError when X is rank deficient at rank_rel_tol.
Mat orthonormalize(const Mat& X, const SpMat& gram, const TolerancePolicy& tol = {});
Mat orthonormalize(const Mat& X, const GramFactor& factor, const TolerancePolicy& tol = {});

/// gram-orthogonal projector onto target.
Mat orthogonal_projection(const Subspace& target, const SpMat& gram, const TolerancePolicy& tol = {});

/// Principal angles in [0, pi/2], nonincreasing, min(dim U, dim V) of them.
/// Small angles come from sines and large ones from cosines, so both ends are
/// accurate to roundoff.
RVec principal_angles(const Subspace& U, const Subspace& V, const SpMat& gram);

/// Largest principal angle, or pi/2 when the dimensions differ.
double subspace_distance(const Subspace& U, const Subspace& V, const SpMat& gram);

/// Smallest eigenvalue of the Hermitian part of M with respect to gram:
/// min Re (Mx, x) / (x, x).
double hermitian_part_min(const Mat& M, const SpMat& gram);
/// Operator norm of M as a map (C^n, gram) -> (C^n, gram).
double weighted_operator_norm(const Mat& M, const SpMat& gram);

struct SingularValueEstimate {
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  bool factorization_failed = false;
};

/// Power/inverse-power estimates of the extreme singular values of a sparse
/// square matrix. Deterministic start vector.
SingularValueEstimate estimate_singular_values(const SpMat& A, int iterations = 40);

/// Least-squares slope of log(err) against log(h).
double observed_order(std::span<const double> h, std::span<const double> err);

SpMat sparse_identity(Eigen::Index n);
SpMat sparse_diagonal(const Vec& d);
SpMat kron(const SpMat& A, const SpMat& B);
/// [A B] and [A; B]
SpMat hstack(const SpMat& A, const SpMat& B);
SpMat vstack(const SpMat& A, const SpMat& B);
/// Row/column selection matrix e_{idx[k]}^T in row k.
SpMat selection(const std::vector<Eigen::Index>& idx, Eigen::Index n);

}  // namespace dtnlab
