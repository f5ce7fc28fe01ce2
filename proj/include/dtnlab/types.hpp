#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace dtnlab {

using Scalar = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<Scalar>;
using Triplet = Eigen::Triplet<Scalar>;

inline constexpr double kPi = 3.14159265358979323846;

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition (shapes, membership).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Invalid user configuration: sizes, coefficient descriptions, schedules.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A basis that should have full column rank does not.
class DegenerateSubspaceError : public Error {
 public:
  using Error::Error;
};

/// Factorization or eigen-solve broke down.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// A linear system is singular at the near-singular threshold. Carries the
/// estimated smallest singular value so callers can switch to graph mode.
class NearSingularError : public Error {
 public:
  NearSingularError(const std::string& what, double sigma_min, double sigma_max)
      : Error(what), sigma_min_(sigma_min), sigma_max_(sigma_max) {}
  double sigma_min() const noexcept { return sigma_min_; }
  double sigma_max() const noexcept { return sigma_max_; }

 private:
  double sigma_min_;
  double sigma_max_;
};

/// Resolvent requested for a multi-valued DtN graph.
class GraphNotOperatorError : public Error {
 public:
  using Error::Error;
};

}  // namespace dtnlab
