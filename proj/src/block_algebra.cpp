#include "mrgarch/block_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mrgarch/errors.hpp"

namespace mrg {

BlockPartition::BlockPartition(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.empty()) throw ArgumentError("block partition must have at least one block");
  for (int block = 0; block < b(); ++block) {
    const int s = sizes_[block];
    if (s < 1) throw ArgumentError("block sizes must be positive");
    offsets_.push_back(p_);
    block_of_.insert(block_of_.end(), s, block);
    p_ += s;
  }
}

int BlockPartition::multi_blocks() const {
  return static_cast<int>(std::count_if(sizes_.begin(), sizes_.end(), [](int s) { return s >= 2; }));
}

int BlockPartition::distinct_correlations() const { return b() * (b() - 1) / 2 + multi_blocks(); }

FactorLoading::FactorLoading(std::vector<int> column_of_row, int cols)
    : column_of_row_(std::move(column_of_row)), counts_(cols, 0), cols_(cols) {
  for (int c : column_of_row_) {
    if (c < 0 || c >= cols_) throw DimensionError("factor loading: column index out of range");
    ++counts_[c];
  }
  for (int n : counts_)
    if (n == 0) throw DimensionError("factor loading: empty column (rank deficient)");
}

FactorLoading FactorLoading::identity(Eigen::Index d) {
  std::vector<int> cols(d);
  std::iota(cols.begin(), cols.end(), 0);
  return FactorLoading(std::move(cols), static_cast<int>(d));
}

bool FactorLoading::is_identity() const {
  if (rows() != cols_) return false;
  for (Eigen::Index r = 0; r < rows(); ++r)
    if (column_of_row_[r] != r) return false;
  return true;
}

Matrix FactorLoading::dense() const {
  Matrix a = Matrix::Zero(rows(), cols_);
  for (Eigen::Index r = 0; r < rows(); ++r) a(r, column_of_row_[r]) = 1.0;
  return a;
}

Vector FactorLoading::expand(const Vector& zeta) const {
  if (zeta.size() != cols_) throw DimensionError("expand: zeta has the wrong length");
  Vector out(rows());
  for (Eigen::Index r = 0; r < rows(); ++r) out(r) = zeta(column_of_row_[r]);
  return out;
}

Vector FactorLoading::condense(const Vector& y) const {
  if (y.size() != rows()) throw DimensionError("condense: y has the wrong length");
  // Running means, so that constant groups condense exactly.
  Vector out = Vector::Zero(cols_);
  std::vector<int> seen(cols_, 0);
  for (Eigen::Index r = 0; r < rows(); ++r) {
    const int c = column_of_row_[r];
    out(c) += (y(r) - out(c)) / ++seen[c];
  }
  return out;
}

std::vector<std::pair<int, int>> loading_columns(const BlockPartition& part) {
  std::vector<std::pair<int, int>> cols;
  for (int i = 0; i < part.b(); ++i)
    if (part.size(i) >= 2) cols.emplace_back(i, i);
  for (int j = 0; j < part.b(); ++j)
    for (int i = j + 1; i < part.b(); ++i) cols.emplace_back(i, j);
  return cols;
}

FactorLoading build_loading(const BlockPartition& part) {
  const auto cols = loading_columns(part);
  const int b = part.b();
  std::vector<int> column_of_pair(b * b, -1);
  for (int c = 0; c < static_cast<int>(cols.size()); ++c)
    column_of_pair[cols[c].first * b + cols[c].second] = c;

  const int p = part.p();
  std::vector<int> column_of_row;
  column_of_row.reserve(vecl_size(p));
  for (int j = 0; j < p; ++j)
    for (int i = j + 1; i < p; ++i) {
      const int bi = part.block_of(i);
      const int bj = part.block_of(j);
      column_of_row.push_back(column_of_pair[std::max(bi, bj) * b + std::min(bi, bj)]);
    }
  return FactorLoading(std::move(column_of_row), static_cast<int>(cols.size()));
}

BlockCorrParams block_params_from_matrix(const Matrix& c, const BlockPartition& part) {
  if (c.rows() != part.p() || c.cols() != part.p())
    throw DimensionError("block_params_from_matrix: matrix does not match partition");
  const int b = part.b();
  BlockCorrParams out{Matrix::Zero(b, b)};
  for (int i = 0; i < b; ++i) {
    if (part.size(i) >= 2) out.rho(i, i) = c(part.offset(i) + 1, part.offset(i));
    for (int j = 0; j < i; ++j) {
      out.rho(i, j) = c(part.offset(i), part.offset(j));
      out.rho(j, i) = out.rho(i, j);
    }
  }
  return out;
}

Matrix dense_block_matrix(const BlockCorrParams& rho, const BlockPartition& part) {
  const int p = part.p();
  Matrix c(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      c(i, j) = i == j ? 1.0 : rho.rho(part.block_of(i), part.block_of(j));
  return c;
}

Matrix companion(const BlockCorrParams& rho, const BlockPartition& part) {
  const int b = part.b();
  if (rho.rho.rows() != b || rho.rho.cols() != b)
    throw DimensionError("companion: parameter matrix does not match partition");
  Matrix a(b, b);
  for (int i = 0; i < b; ++i)
    for (int j = 0; j < b; ++j) {
      const double pi = part.size(i);
      const double pj = part.size(j);
      a(i, j) = i == j ? 1.0 + (pi - 1.0) * rho.rho(i, i) : rho.rho(i, j) * std::sqrt(pi * pj);
    }
  return a;
}

Validity is_valid(const BlockCorrParams& rho, const BlockPartition& part) {
  Validity v;
  if (rho.rho.rows() != part.b() || rho.rho.cols() != part.b()) {
    v.reason = "parameter matrix does not match partition";
    return v;
  }
  if (!rho.rho.allFinite()) {
    v.reason = "non-finite parameters";
    return v;
  }
  for (int i = 0; i < part.b(); ++i) {
    if (part.size(i) >= 2 && !(rho.rho(i, i) < 1.0)) {
      std::ostringstream os;
      os << "within-block correlation of block " << i << " is not below one";
      v.reason = os.str();
      return v;
    }
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(companion(rho, part), Eigen::EigenvaluesOnly);
  v.min_companion_eigenvalue = es.eigenvalues().minCoeff();
  if (!(v.min_companion_eigenvalue > 0.0)) {
    v.reason = "companion matrix is not positive definite";
    return v;
  }
  v.valid = true;
  return v;
}

Matrix BlockInverse::dense() const {
  const int p = part.p();
  Matrix out(p, p);
  for (int r = 0; r < p; ++r)
    for (int c = 0; c < p; ++c) {
      const int i = part.block_of(r);
      const int j = part.block_of(c);
      const double pij = 1.0 / std::sqrt(static_cast<double>(part.size(i)) * part.size(j));
      double v = a_sharp(i, j) * pij;
      if (i == j) v += within(i) * ((r == c ? 1.0 : 0.0) - pij);
      out(r, c) = v;
    }
  return out;
}

BlockCorrelation::BlockCorrelation(const BlockCorrParams& rho, const BlockPartition& part) : part_(part) {
  const Validity v = is_valid(rho, part);
  if (!v.valid) throw DomainError("invalid block correlation parameters: " + v.reason);
  const Matrix a = companion(rho, part);
  companion_llt_.compute(a);
  if (companion_llt_.info() != Eigen::Success)
    throw DomainError("invalid block correlation parameters: companion factorization failed");
  a_sharp_ = companion_llt_.solve(Matrix::Identity(part.b(), part.b()));
  within_ = Vector::Zero(part.b());
  log_det_ = 2.0 * companion_llt_.matrixLLT().diagonal().array().log().sum();
  for (int i = 0; i < part.b(); ++i) {
    if (part.size(i) < 2) continue;
    const double gap = 1.0 - rho.rho(i, i);
    within_(i) = 1.0 / gap;
    log_det_ += (part.size(i) - 1) * std::log(gap);
  }
}

double BlockCorrelation::det() const { return std::exp(log_det_); }

BlockInverse BlockCorrelation::inverse() const { return BlockInverse{a_sharp_, within_, part_}; }

double BlockCorrelation::quadform(const Vector& z) const {
  if (z.size() != part_.p()) throw DimensionError("block_quadform: vector does not match partition");
  const int b = part_.b();
  Vector s(b);  // block sums scaled by 1/sqrt(p_i)
  double within_part = 0.0;
  for (int i = 0; i < b; ++i) {
    const auto seg = z.segment(part_.offset(i), part_.size(i));
    const double sum = seg.sum();
    s(i) = sum / std::sqrt(static_cast<double>(part_.size(i)));
    if (part_.size(i) >= 2) within_part += within_(i) * (seg.squaredNorm() - sum * sum / part_.size(i));
  }
  return s.dot(a_sharp_ * s) + within_part;
}

double block_det(const BlockCorrParams& rho, const BlockPartition& part) {
  return BlockCorrelation(rho, part).det();
}

BlockInverse block_inverse(const BlockCorrParams& rho, const BlockPartition& part) {
  return BlockCorrelation(rho, part).inverse();
}

double block_quadform(const Vector& z, const BlockCorrParams& rho, const BlockPartition& part) {
  return BlockCorrelation(rho, part).quadform(z);
}

}  // namespace mrg
