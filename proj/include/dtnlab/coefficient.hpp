#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dtnlab/dual_pair.hpp"

namespace dtnlab {

/// Which space a coefficient acts on: a on H1 (faces), m on H0 (nodes).
enum class Which { A, M };

/// User-level description of a coefficient. Expression texts may contain the
/// placeholder {n}, replaced by the oscillation index when a sequence member
/// is generated.
struct CoefficientSpec {
  enum class Kind { Constant, Values, Expression, Tensor, Matrix, Checkerboard };

  Kind kind = Kind::Constant;
  Scalar constant{1.0, 0.0};
  std::vector<Scalar> values;
  std::string re;
  std::string im;
  std::shared_ptr<const CoefficientSpec> xx;
  std::shared_ptr<const CoefficientSpec> yy;
  Mat matrix;
  double low = 1.0;
  double high = 1.0;

  static CoefficientSpec make_constant(Scalar c);
  static CoefficientSpec make_expression(std::string re, std::string im = {});
  static CoefficientSpec make_values(std::vector<Scalar> v);
  static CoefficientSpec make_checkerboard(double low, double high);
  static CoefficientSpec make_tensor(CoefficientSpec xx, CoefficientSpec yy);
  static CoefficientSpec make_matrix(Mat m);

  bool operator==(const CoefficientSpec& o) const;
};

/// Bounded operator on H0 or H1 with the constants the solvers rely on.
struct CoefficientOp {
  SpMat matrix;
  bool diagonal = true;
  bool hermitian = true;
  double hermitian_min = 0.0;  // min Re (Mx, x) / (x, x)
  double norm_bound = 0.0;     // operator norm in the space inner product
  std::optional<double> coercivity_mu;

  static CoefficientOp from_matrix(const SpMat& m, const WeightedSpace& space);
  static CoefficientOp from_diagonal(const Vec& d);

  bool coercive() const { return coercivity_mu.has_value(); }
  Eigen::Index dim() const { return matrix.rows(); }
  /// Adjoint with respect to the space inner product.
  SpMat adjoint(const WeightedSpace& space) const;
  SpMat inverse() const;
  CoefficientOp shifted(Scalar s, const WeightedSpace& space) const;
};

CoefficientOp coefficient_from_spec(const CoefficientSpec& spec, const DualPair& p, Which which,
                                    int osc = 1);
CoefficientOp constant_coefficient(const DualPair& p, Which which, Scalar c);

/// Replaces every {n} in a template with the given integer.
std::string instantiate_template(const std::string& text, int osc);

}  // namespace dtnlab
