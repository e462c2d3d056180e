#pragma once

// Vector parametrization of correlation matrices through the matrix
// logarithm, plus the symmetric matrix functions it rests on.
//
// Layout convention used throughout the library: a CorrVector stacks the
// strictly-lower triangle of a p x p matrix column by column, i.e. the
// entries (2,1),(3,1),...,(p,1),(3,2),...,(p,p-1).

#include <Eigen/Dense>

namespace mrg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// d = p(p-1)/2.
Eigen::Index vecl_size(Eigen::Index p);

/// Inverse of vecl_size; throws DimensionError when d is not triangular.
Eigen::Index dim_from_vecl_size(Eigen::Index d);

/// Strictly-lower triangle of a square matrix, column-major.
Vector vecl(const Matrix& m);

/// Symmetric matrix with the given diagonal and lower triangle taken from v.
Matrix unvecl(const Vector& v, const Vector& diag);

/// Matrix logarithm of a symmetric positive definite matrix via its spectral
/// decomposition. Throws DomainError when the smallest eigenvalue does not
/// exceed 1e-12 times the largest.
Matrix sym_log(const Matrix& m);

/// Matrix exponential of a symmetric matrix via its spectral decomposition.
Matrix sym_exp(const Matrix& m);

/// vecl(log C).
Vector g_transform(const Matrix& corr);

struct GInverseOptions {
  double tolerance = 1e-12;  // on max |diag(exp A[x]) - 1|
  int max_iterations = 200;
};

struct GInverseResult {
  Matrix corr;      // unit diagonal, exactly
  Vector log_diag;  // diagonal of log C at convergence
  int iterations = 0;
  double residual = 0.0;
};

/// Correlation matrix C with vecl(log C) = v.
///
/// Fixed-point iteration on the unknown diagonal x of log C: with A[x] the
/// symmetric matrix carrying v below the diagonal and x on it, update
/// x <- x - log(diag(exp A[x])) until the diagonal of exp A[x] is one.
/// `start` seeds x (zero when empty); the filter passes the previous period's
/// solution. Throws NumericalError carrying the last residual on
/// non-convergence.
GInverseResult g_inverse_detailed(const Vector& v, const Vector& start = Vector(),
                                  const GInverseOptions& opts = {});

Matrix g_inverse(const Vector& v, const GInverseOptions& opts = {});

/// Symmetric, unit diagonal, positive definite (relative eigenvalue floor).
bool is_correlation_matrix(const Matrix& c, double tol = 1e-10);

enum class NonPdPolicy { kReject, kRepair };

struct RealizedDecomposition {
  Vector x;  // diag(RM), realized variances
  Matrix Y;  // realized correlation matrix
  Vector y;  // g_transform(Y)
};

/// Splits a realized covariance matrix into variances and the transformed
/// realized correlations. Non-PD input throws DomainError unless the repair
/// policy is selected explicitly.
RealizedDecomposition realized_decompose(const Matrix& rm,
                                         NonPdPolicy policy = NonPdPolicy::kReject);

/// Clips eigenvalues at 1e-8 x the largest and restores the original diagonal.
Matrix repair_nonpd(const Matrix& rm);

}  // namespace mrg
