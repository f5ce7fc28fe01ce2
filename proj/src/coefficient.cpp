#include "dtnlab/coefficient.hpp"

#include <cmath>

#include "dtnlab/expr.hpp"

namespace dtnlab {

using Eigen::Index;

CoefficientSpec CoefficientSpec::make_constant(Scalar c) {
  CoefficientSpec s;
  s.kind = Kind::Constant;
  s.constant = c;
  return s;
}

CoefficientSpec CoefficientSpec::make_expression(std::string re, std::string im) {
  CoefficientSpec s;
  s.kind = Kind::Expression;
  s.re = std::move(re);
  s.im = std::move(im);
  return s;
}

CoefficientSpec CoefficientSpec::make_values(std::vector<Scalar> v) {
  CoefficientSpec s;
  s.kind = Kind::Values;
  s.values = std::move(v);
  return s;
}

CoefficientSpec CoefficientSpec::make_checkerboard(double low, double high) {
  CoefficientSpec s;
  s.kind = Kind::Checkerboard;
  s.low = low;
  s.high = high;
  return s;
}

CoefficientSpec CoefficientSpec::make_tensor(CoefficientSpec xx, CoefficientSpec yy) {
  CoefficientSpec s;
  s.kind = Kind::Tensor;
  s.xx = std::make_shared<const CoefficientSpec>(std::move(xx));
  s.yy = std::make_shared<const CoefficientSpec>(std::move(yy));
  return s;
}

CoefficientSpec CoefficientSpec::make_matrix(Mat m) {
  CoefficientSpec s;
  s.kind = Kind::Matrix;
  s.matrix = std::move(m);
  return s;
}

bool CoefficientSpec::operator==(const CoefficientSpec& o) const {
  if (kind != o.kind) return false;
  switch (kind) {
    case Kind::Constant: return constant == o.constant;
    case Kind::Values: return values == o.values;
    case Kind::Expression: return re == o.re && im == o.im;
    case Kind::Checkerboard: return low == o.low && high == o.high;
    case Kind::Tensor: return *xx == *o.xx && *yy == *o.yy;
    case Kind::Matrix:
      return matrix.rows() == o.matrix.rows() && matrix.cols() == o.matrix.cols() && matrix == o.matrix;
  }
  return false;
}

std::string instantiate_template(const std::string& text, int osc) {
  std::string out;
  const std::string key = "{n}";
  std::size_t pos = 0;
  for (;;) {
    const std::size_t hit = text.find(key, pos);
    if (hit == std::string::npos) {
      out.append(text, pos, std::string::npos);
      return out;
    }
    out.append(text, pos, hit - pos);
    out += std::to_string(osc);
    pos = hit + key.size();
  }
}

CoefficientOp CoefficientOp::from_diagonal(const Vec& d) {
  CoefficientOp op;
  op.matrix = sparse_diagonal(d);
  op.diagonal = true;
  op.hermitian = true;
  double hmin = std::numeric_limits<double>::infinity();
  double nmax = 0.0;
  for (Index i = 0; i < d.size(); ++i) {
    if (!std::isfinite(d(i).real()) || !std::isfinite(d(i).imag())) {
      throw ConfigError("coefficient sample is not finite");
    }
    hmin = std::min(hmin, d(i).real());
    nmax = std::max(nmax, std::abs(d(i)));
    if (std::abs(d(i).imag()) > 1e-15 * std::abs(d(i))) op.hermitian = false;
  }
  op.hermitian_min = d.size() ? hmin : 0.0;
  op.norm_bound = nmax;
  if (op.hermitian_min > 0.0) op.coercivity_mu = op.hermitian_min;
  return op;
}

CoefficientOp CoefficientOp::from_matrix(const SpMat& m, const WeightedSpace& space) {
  if (m.rows() != space.dim() || m.cols() != space.dim()) {
    throw ConfigError("coefficient matrix does not match the space dimension");
  }
  bool diag = true;
  for (Index k = 0; k < m.outerSize() && diag; ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it)
      if (it.row() != it.col() && it.value() != Scalar(0)) {
        diag = false;
        break;
      }
  if (diag && space.factor().is_diagonal()) return from_diagonal(Mat(m).diagonal());

  const Mat M(m);
  if (!M.allFinite()) throw ConfigError("coefficient matrix is not finite");
  CoefficientOp op;
  op.matrix = m;
  op.diagonal = false;
  op.hermitian_min = hermitian_part_min(M, space.gram());
  op.norm_bound = weighted_operator_norm(M, space.gram());
  const Mat adj = space.solve(M.adjoint() * space.gram());
  op.hermitian = (adj - M).norm() <= 1e-13 * std::max(1.0, M.norm());
  if (op.hermitian_min > 0.0) op.coercivity_mu = op.hermitian_min;
  return op;
}

SpMat CoefficientOp::adjoint(const WeightedSpace& space) const {
  if (diagonal) return SpMat(matrix.adjoint());
  const Mat adj = space.solve(Mat(matrix).adjoint() * space.gram());
  return adj.sparseView(1.0, 1e-300);
}

SpMat CoefficientOp::inverse() const {
  if (diagonal) {
    SpMat inv = matrix;
    for (Index k = 0; k < inv.outerSize(); ++k)
      for (SpMat::InnerIterator it(inv, k); it; ++it) {
        if (it.value() == Scalar(0)) throw NumericalFailure("coefficient is not invertible");
        it.valueRef() = Scalar(1) / it.value();
      }
    return inv;
  }
  Eigen::FullPivLU<Mat> lu{Mat(matrix)};
  if (!lu.isInvertible()) throw NumericalFailure("coefficient is not invertible");
  return Mat(lu.inverse()).sparseView(1.0, 1e-300);
}

CoefficientOp CoefficientOp::shifted(Scalar s, const WeightedSpace& space) const {
  SpMat m = matrix + s * sparse_identity(matrix.rows());
  if (diagonal) return from_diagonal(Mat(m).diagonal());
  return from_matrix(m, space);
}

namespace {

Vec sample(const CoefficientSpec& spec, const RMat& coords, int osc) {
  const Index n = coords.rows();
  Vec d(n);
  switch (spec.kind) {
    case CoefficientSpec::Kind::Constant:
      d.setConstant(spec.constant);
      break;
    case CoefficientSpec::Kind::Values:
      if (static_cast<Index>(spec.values.size()) != n) {
        throw ConfigError("coefficient array has " + std::to_string(spec.values.size()) + " values, expected " +
                          std::to_string(n));
      }
      for (Index i = 0; i < n; ++i) d(i) = spec.values[static_cast<std::size_t>(i)];
      break;
    case CoefficientSpec::Kind::Expression: {
      const Expr re = Expr::parse(instantiate_template(spec.re, osc));
      const bool has_im = !spec.im.empty();
      const Expr im = has_im ? Expr::parse(instantiate_template(spec.im, osc)) : Expr::parse("0");
      for (Index i = 0; i < n; ++i) {
        const double x = coords(i, 0), y = coords(i, 1);
        d(i) = Scalar(re.eval(x, y), has_im ? im.eval(x, y) : 0.0);
      }
      break;
    }
    case CoefficientSpec::Kind::Checkerboard:
      for (Index i = 0; i < n; ++i) {
        const double scale = 2.0 * osc;
        // the small shift keeps samples that sit on a cell edge deterministic
        const auto cx = static_cast<long>(std::floor(coords(i, 0) * scale + 1e-12));
        const auto cy = static_cast<long>(std::floor(coords(i, 1) * scale + 1e-12));
        d(i) = ((cx + cy) % 2 == 0) ? spec.low : spec.high;
      }
      break;
    default:
      throw ConfigError("coefficient kind cannot be sampled pointwise");
  }
  for (Index i = 0; i < n; ++i)
    if (!std::isfinite(d(i).real()) || !std::isfinite(d(i).imag())) {
      throw ConfigError("coefficient sample is not finite at dof " + std::to_string(i));
    }
  return d;
}

}  // namespace

CoefficientOp coefficient_from_spec(const CoefficientSpec& spec, const DualPair& p, Which which, int osc) {
  const WeightedSpace& space = which == Which::A ? p.h1 : p.h0;
  const RMat& coords = which == Which::A ? p.coords1 : p.coords0;
  switch (spec.kind) {
    case CoefficientSpec::Kind::Matrix: {
      if (spec.matrix.rows() != space.dim() || spec.matrix.cols() != space.dim()) {
        throw ConfigError("coefficient matrix must be " + std::to_string(space.dim()) + "x" +
                          std::to_string(space.dim()));
      }
      return CoefficientOp::from_matrix(spec.matrix.sparseView(1.0, 1e-300), space);
    }
    case CoefficientSpec::Kind::Tensor: {
      if (which != Which::A) throw ConfigError("tensor coefficients act on the face space only");
      const Vec dx = sample(*spec.xx, coords, osc);
      const Vec dy = sample(*spec.yy, coords, osc);
      Vec d(coords.rows());
      for (Index i = 0; i < d.size(); ++i) d(i) = p.face_family[static_cast<std::size_t>(i)] == 0 ? dx(i) : dy(i);
      return CoefficientOp::from_diagonal(d);
    }
    default:
      return CoefficientOp::from_diagonal(sample(spec, coords, osc));
  }
}

CoefficientOp constant_coefficient(const DualPair& p, Which which, Scalar c) {
  const Index n = which == Which::A ? p.n1() : p.n0();
  return CoefficientOp::from_diagonal(Vec::Constant(n, c));
}

}  // namespace dtnlab
