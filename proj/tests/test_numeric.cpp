#include <doctest.h>

#include <cmath>

#include "dtnlab/expr.hpp"
#include "dtnlab/numeric.hpp"
#include "oracles.hpp"

using namespace dtnlab;
using Eigen::Index;

namespace {

SpMat spd_gram(Index n) {
  std::vector<Triplet> t;
  for (Index i = 0; i < n; ++i) {
    t.emplace_back(i, i, 4.0);
    if (i + 1 < n) {
      t.emplace_back(i, i + 1, 1.0);
      t.emplace_back(i + 1, i, 1.0);
    }
  }
  SpMat g(n, n);
  g.setFromTriplets(t.begin(), t.end());
  return g;
}

}  // namespace

TEST_CASE("tolerance policy rejects non-positive tolerances") {
  TolerancePolicy t;
  CHECK_NOTHROW(t.validate());
  t.rank_rel_tol = 0.0;
  CHECK_THROWS_AS(t.validate(), ConfigError);
}

TEST_CASE("weighted space validates its Gram matrix") {
  const WeightedSpace s(spd_gram(5));
  Vec x = Vec::Ones(5);
  // x^T K x for the tridiagonal (1, 4, 1): 5 * 4 + 2 * 4
  CHECK(s.inner(x, x).real() == doctest::Approx(28.0));
  CHECK(s.norm(x) == doctest::Approx(std::sqrt(28.0)));
  SpMat bad = spd_gram(3);
  bad.coeffRef(0, 0) = -1.0;
  CHECK_THROWS(WeightedSpace(bad));
}

TEST_CASE("gram factor reproduces the weighted norm") {
  const SpMat K = spd_gram(6);
  const GramFactor F(K);
  CHECK_FALSE(F.is_diagonal());
  const Mat X = Mat::Random(6, 3);
  const Mat FX = F.apply(X);
  CHECK((FX.adjoint() * FX - X.adjoint() * K * X).norm() < 1e-12);
  CHECK((F.solve(K * X) - X).norm() < 1e-12);
  const GramFactor Fd(sparse_diagonal(Vec::Constant(4, 2.0)));
  CHECK(Fd.is_diagonal());
}

TEST_CASE("weighted adjoint satisfies the defining identity") {
  const WeightedSpace from(spd_gram(4));
  const WeightedSpace to = WeightedSpace::diagonal((RVec(3) << 1.0, 2.0, 3.0).finished());
  const Mat A = Mat::Random(3, 4);
  const Mat Ad = weighted_adjoint(A, from, to);
  const Vec x = Vec::Random(4), y = Vec::Random(3);
  CHECK(std::abs(to.inner(A * x, y) - from.inner(x, Ad * y)) < 1e-12);
}

TEST_CASE("numeric kernel and rank against a constructed matrix") {
  // rank 2 by construction: third column = first + second
  Mat A(3, 3);
  A << 1, 2, 3, 4, 5, 9, 7, 8, 15;
  CHECK(numeric_rank(A) == 2);
  const Subspace k = numeric_kernel(A);
  REQUIRE(k.dim() == 1);
  CHECK((A * k.basis).norm() < 1e-12);
  Vec expected(3);
  expected << 1, 1, -1;
  CHECK(oracle::max_angle_sine(k.basis, expected) < 1e-12);
}

TEST_CASE("singular values match a dense SVD") {
  const Mat A = Mat::Random(7, 5);
  const RVec sv = singular_values(A);
  const RVec ref = Eigen::JacobiSVD<Mat>(A).singularValues();
  CHECK((sv - ref).norm() < 1e-12);
}

TEST_CASE("sparse kernel basis of the forward difference is the constants") {
  std::vector<Triplet> t;
  for (Index i = 0; i < 5; ++i) {
    t.emplace_back(i, i, -1.0);
    t.emplace_back(i, i + 1, 1.0);
  }
  SpMat G(5, 6);
  G.setFromTriplets(t.begin(), t.end());
  const SpMat K = sparse_kernel_basis(G);
  REQUIRE(K.cols() == 1);
  CHECK(oracle::max_angle_sine(Mat(K), Mat::Ones(6, 1)) < 1e-12);
}

TEST_CASE("orthonormalize returns a gram-orthonormal basis of the same span") {
  const SpMat K = spd_gram(6);
  const Mat X = Mat::Random(6, 3);
  const Mat Q = orthonormalize(X, K);
  CHECK((Q.adjoint() * K * Q - Mat::Identity(3, 3)).norm() < 1e-12);
  CHECK(principal_angles(Subspace{X}, Subspace{Q}, K).maxCoeff() < 1e-12);
  Mat Y = X;
  Y.col(2) = Y.col(0) - 2.0 * Y.col(1);
  CHECK_THROWS_AS(orthonormalize(Y, K), DegenerateSubspaceError);
}

TEST_CASE("principal angles of coordinate planes") {
  const SpMat I = sparse_identity(3);
  Mat e1 = Mat::Zero(3, 1), e2 = Mat::Zero(3, 1), d = Mat::Zero(3, 1);
  e1(0, 0) = 1;
  e2(1, 0) = 1;
  d(0, 0) = d(1, 0) = 1;
  CHECK(principal_angles(Subspace{e1}, Subspace{e1}, I)(0) == doctest::Approx(0.0));
  CHECK(principal_angles(Subspace{e1}, Subspace{e2}, I)(0) == doctest::Approx(kPi / 2));
  CHECK(principal_angles(Subspace{e1}, Subspace{d}, I)(0) == doctest::Approx(kPi / 4));
  // tiny angle resolved by the sine branch
  Mat t = e1;
  t(1, 0) = 1e-12;
  CHECK(principal_angles(Subspace{e1}, Subspace{t}, I)(0) == doctest::Approx(1e-12).epsilon(1e-3));
  CHECK(subspace_distance(Subspace{e1}, Subspace{Mat::Identity(3, 2)}, I) == doctest::Approx(kPi / 2));
}

TEST_CASE("orthogonal projection is idempotent and self-adjoint in the gram inner product") {
  const SpMat K = spd_gram(5);
  const Mat P = orthogonal_projection(Subspace{Mat::Random(5, 2)}, K);
  CHECK((P * P - P).norm() < 1e-12);
  CHECK((Mat(K) * P - P.adjoint() * Mat(K)).norm() < 1e-12);
}

TEST_CASE("hermitian part minimum and weighted operator norm") {
  const SpMat K = sparse_diagonal(Vec::Constant(2, 4.0));
  Mat M(2, 2);
  M << 2, 1, -1, 3;  // Hermitian part diag(2, 3)
  CHECK(hermitian_part_min(M, K) == doctest::Approx(2.0));
  // a scalar multiple of the gram does not change the operator norm
  const Mat N = Mat::Random(3, 3);
  CHECK(weighted_operator_norm(N, sparse_identity(3) * 7.0) == doctest::Approx(singular_values(N)(0)));
}

TEST_CASE("extreme singular value estimates of a sparse matrix") {
  const SpMat A = spd_gram(40);
  const RVec ref = Eigen::JacobiSVD<Mat>(Mat(A)).singularValues();
  // clustered ends of the spectrum: contraction ~0.98 per step
  const SingularValueEstimate e = estimate_singular_values(A, 1500);
  CHECK(e.sigma_max == doctest::Approx(ref(0)).epsilon(1e-6));
  CHECK(e.sigma_min == doctest::Approx(ref(ref.size() - 1)).epsilon(1e-6));
}

TEST_CASE("observed order of an exact power law") {
  const std::vector<double> h{0.1, 0.05, 0.025};
  std::vector<double> e;
  for (double x : h) e.push_back(3.0 * x * x);
  CHECK(observed_order(h, e) == doctest::Approx(2.0));
}

TEST_CASE("kron matches the dense Kronecker product") {
  const Mat A = Mat::Random(2, 3), B = Mat::Random(3, 2);
  const Mat K(kron(A.sparseView(), B.sparseView()));
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 3; ++j) CHECK((K.block(3 * i, 2 * j, 3, 2) - A(i, j) * B).norm() < 1e-14);
  CHECK(hstack(A.sparseView(), A.sparseView()).cols() == 6);
  CHECK(vstack(A.sparseView(), A.sparseView()).rows() == 4);
  const SpMat S = selection({2, 0}, 3);
  CHECK(S.coeff(0, 2) == Scalar(1.0));
  CHECK(S.coeff(1, 0) == Scalar(1.0));
}

TEST_CASE("expression grammar") {
  const Expr e = Expr::parse("2+sin(2*pi*x)");
  CHECK(e.count(Expr::Kind::Func) == 1);
  CHECK(e.root().kind == Expr::Kind::Add);
  CHECK(e.eval(0.125) == doctest::Approx(2.0 + std::sin(0.25 * kPi)));
  CHECK_FALSE(e.uses_y());
  CHECK(Expr::parse("2+3*4").eval(0) == doctest::Approx(14.0));
  CHECK(Expr::parse("(2+3)*4").eval(0) == doctest::Approx(20.0));
  CHECK(Expr::parse("-x/4").eval(2.0) == doctest::Approx(-0.5));
  CHECK(Expr::parse("8-2-1").eval(0) == doctest::Approx(5.0));
  CHECK(Expr::parse("exp(abs(-1))+cos(y)").eval(0, 0) == doctest::Approx(std::exp(1.0) + 1.0));
  CHECK(Expr::parse("x*y").uses_y());
  CHECK(Expr::parse("1.5e-1").eval(0) == doctest::Approx(0.15));
}

TEST_CASE("expression errors carry the column") {
  try {
    Expr::parse("2+*3");
    FAIL("expected a parse error");
  } catch (const ExprParseError& e) {
    CHECK(e.column() == 3);
  }
  CHECK_THROWS_AS(Expr::parse(""), ExprParseError);
  CHECK_THROWS_AS(Expr::parse("tan(x)"), ExprParseError);
  CHECK_THROWS_AS(Expr::parse("(1+x"), ExprParseError);
  CHECK_THROWS_AS(Expr::parse("1 2"), ExprParseError);
}
