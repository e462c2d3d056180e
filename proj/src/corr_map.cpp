#include "mrgarch/corr_map.hpp"

#include <cmath>
#include <sstream>

#include "mrgarch/errors.hpp"

namespace mrg {

namespace {

constexpr double kPdRelativeFloor = 1e-12;
constexpr double kRepairRelativeFloor = 1e-8;

void require_square(const Matrix& m, const char* who) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    std::ostringstream os;
    os << who << ": expected a square matrix, got " << m.rows() << "x" << m.cols();
    throw DimensionError(os.str());
  }
}

template <typename F>
Matrix spectral_apply(const Eigen::SelfAdjointEigenSolver<Matrix>& es, F&& f) {
  const Matrix& q = es.eigenvectors();
  const Vector mapped = es.eigenvalues().unaryExpr(f);
  Matrix out = q * mapped.asDiagonal() * q.transpose();
  return 0.5 * (out + out.transpose());
}

}  // namespace

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimension: return "dimension_error";
    case ErrorCode::kDomain: return "domain_error";
    case ErrorCode::kNumerical: return "numerical_error";
    case ErrorCode::kRank: return "rank_error";
    case ErrorCode::kData: return "data_error";
    case ErrorCode::kEstimation: return "estimation_error";
    case ErrorCode::kArgument: return "argument_error";
  }
  return "error";
}

Eigen::Index vecl_size(Eigen::Index p) { return p * (p - 1) / 2; }

Eigen::Index dim_from_vecl_size(Eigen::Index d) {
  if (d < 0) throw DimensionError("negative vecl length");
  const auto p = static_cast<Eigen::Index>(std::llround((1.0 + std::sqrt(1.0 + 8.0 * d)) / 2.0));
  if (vecl_size(p) != d) {
    std::ostringstream os;
    os << "vecl length " << d << " is not p(p-1)/2 for any integer p";
    throw DimensionError(os.str());
  }
  return p;
}

Vector vecl(const Matrix& m) {
  require_square(m, "vecl");
  const Eigen::Index p = m.rows();
  Vector v(vecl_size(p));
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index i = j + 1; i < p; ++i) v(k++) = m(i, j);
  return v;
}

Matrix unvecl(const Vector& v, const Vector& diag) {
  const Eigen::Index p = dim_from_vecl_size(v.size());
  if (diag.size() != p) {
    std::ostringstream os;
    os << "unvecl: diagonal has length " << diag.size() << ", expected " << p;
    throw DimensionError(os.str());
  }
  Matrix m(p, p);
  m.diagonal() = diag;
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index i = j + 1; i < p; ++i) {
      m(i, j) = v(k);
      m(j, i) = v(k);
      ++k;
    }
  return m;
}

Matrix sym_log(const Matrix& m) {
  require_square(m, "sym_log");
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  if (es.info() != Eigen::Success) throw NumericalError("sym_log: eigendecomposition failed");
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(hi > 0.0) || !(lo > kPdRelativeFloor * hi)) {
    std::ostringstream os;
    os << "sym_log: matrix is not positive definite (eigenvalues in [" << lo << ", " << hi << "])";
    throw DomainError(os.str());
  }
  return spectral_apply(es, [](double l) { return std::log(l); });
}

Matrix sym_exp(const Matrix& m) {
  require_square(m, "sym_exp");
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  if (es.info() != Eigen::Success) throw NumericalError("sym_exp: eigendecomposition failed");
  return spectral_apply(es, [](double l) { return std::exp(l); });
}

Vector g_transform(const Matrix& corr) { return vecl(sym_log(corr)); }

namespace {

// Fixed-point iteration x <- x - log diag(exp(A[x])). Only the diagonal of
// the exponential is formed until convergence. N is the compile-time size
// (or Eigen::Dynamic); small sizes avoid heap traffic in the filter loop.
template <int N>
bool g_inverse_fixed_point(const Vector& v, Vector& x, const GInverseOptions& opts, GInverseResult& out,
                           double& residual) {
  using Mat = Eigen::Matrix<double, N, N>;
  using Vec = Eigen::Matrix<double, N, 1>;
  const Eigen::Index p = x.size();
  Mat a(p, p);
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index i = j + 1; i < p; ++i, ++k) a(i, j) = a(j, i) = v(k);
  Vec xv = x;
  Eigen::SelfAdjointEigenSolver<Mat> es(p);
  for (int it = 0; it <= opts.max_iterations; ++it) {
    a.diagonal() = xv;
    es.compute(a);
    if (es.info() != Eigen::Success) break;
    const Vec el = es.eigenvalues().array().exp();
    const Vec d = es.eigenvectors().array().square().matrix() * el;
    residual = (d.array() - 1.0).abs().maxCoeff();
    if (residual < opts.tolerance) {
      Mat e = es.eigenvectors() * el.asDiagonal() * es.eigenvectors().transpose();
      e = 0.5 * (e + e.transpose()).eval();
      e.diagonal().setOnes();
      out.corr = e;
      out.log_diag = xv;
      out.iterations = it;
      out.residual = residual;
      return true;
    }
    if (!std::isfinite(residual)) break;
    xv.array() -= d.array().log();
  }
  return false;
}

}  // namespace

GInverseResult g_inverse_detailed(const Vector& v, const Vector& start, const GInverseOptions& opts) {
  const Eigen::Index p = dim_from_vecl_size(v.size());
  if (!v.allFinite()) throw DomainError("g_inverse: non-finite input vector");

  Vector x = start.size() == p ? start : Vector::Zero(p);
  GInverseResult out;
  double residual = 0.0;
  bool ok = false;
  switch (p) {
    case 1:
      out.corr = Matrix::Ones(1, 1);
      out.log_diag = Vector::Zero(1);
      return out;
    case 2: ok = g_inverse_fixed_point<2>(v, x, opts, out, residual); break;
    case 3: ok = g_inverse_fixed_point<3>(v, x, opts, out, residual); break;
    case 4: ok = g_inverse_fixed_point<4>(v, x, opts, out, residual); break;
    default: ok = g_inverse_fixed_point<Eigen::Dynamic>(v, x, opts, out, residual); break;
  }
  if (ok) return out;
  std::ostringstream os;
  os << "g_inverse: no convergence within " << opts.max_iterations
     << " iterations (residual " << residual << ")";
  throw NumericalError(os.str(), opts.max_iterations, residual);
}

Matrix g_inverse(const Vector& v, const GInverseOptions& opts) {
  return g_inverse_detailed(v, Vector(), opts).corr;
}

bool is_correlation_matrix(const Matrix& c, double tol) {
  if (c.rows() != c.cols() || c.rows() < 1 || !c.allFinite()) return false;
  if ((c - c.transpose()).cwiseAbs().maxCoeff() > tol) return false;
  if ((c.diagonal().array() - 1.0).abs().maxCoeff() > tol) return false;
  Eigen::SelfAdjointEigenSolver<Matrix> es(c, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() > kPdRelativeFloor * es.eigenvalues().maxCoeff();
}

Matrix repair_nonpd(const Matrix& rm) {
  require_square(rm, "repair_nonpd");
  const Vector diag = rm.diagonal();
  if ((diag.array() <= 0.0).any()) throw DomainError("repair_nonpd: non-positive variance on the diagonal");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rm + rm.transpose()));
  const double floor = kRepairRelativeFloor * es.eigenvalues().maxCoeff();
  Matrix clipped = spectral_apply(es, [floor](double l) { return std::max(l, floor); });
  const Vector scale = (diag.array() / clipped.diagonal().array()).sqrt();
  Matrix out = scale.asDiagonal() * clipped * scale.asDiagonal();
  out.diagonal() = diag;
  return out;
}

RealizedDecomposition realized_decompose(const Matrix& rm, NonPdPolicy policy) {
  require_square(rm, "realized_decompose");
  if (!rm.allFinite()) throw DomainError("realized measure has non-finite entries");
  const Matrix& src = policy == NonPdPolicy::kRepair ? repair_nonpd(rm) : rm;
  RealizedDecomposition out;
  out.x = src.diagonal();
  if ((out.x.array() <= 0.0).any()) throw DomainError("realized measure has a non-positive variance");
  const Vector inv_sd = out.x.array().rsqrt();
  out.Y = inv_sd.asDiagonal() * src * inv_sd.asDiagonal();
  out.Y = 0.5 * (out.Y + out.Y.transpose());
  out.Y.diagonal().setOnes();
  out.y = g_transform(out.Y);  // throws DomainError when not PD
  return out;
}

}  // namespace mrg
