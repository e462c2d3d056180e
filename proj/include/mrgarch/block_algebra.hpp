#pragma once

// Block correlation matrices: partitions, the 0/1 factor loading that maps
// distinct transformed correlations onto the full vecl layout, and the
// closed forms for determinant, inverse and quadratic forms obtained from
// the b x b companion matrix.

#include <string>
#include <utility>
#include <vector>

#include "mrgarch/corr_map.hpp"

namespace mrg {

/// Contiguous partition of p assets into b blocks of sizes p_1..p_b.
class BlockPartition {
 public:
  BlockPartition() = default;
  explicit BlockPartition(std::vector<int> sizes);

  /// One block holding all p assets (equicorrelation).
  static BlockPartition single(int p) { return BlockPartition({p}); }

  const std::vector<int>& sizes() const { return sizes_; }
  int p() const { return p_; }
  int b() const { return static_cast<int>(sizes_.size()); }
  int size(int block) const { return sizes_[block]; }
  int offset(int block) const { return offsets_[block]; }
  int block_of(int asset) const { return block_of_[asset]; }
  /// Blocks holding at least two assets.
  int multi_blocks() const;
  /// Number of distinct correlations, b(b-1)/2 + #{i : p_i >= 2}.
  int distinct_correlations() const;

  bool operator==(const BlockPartition& o) const { return sizes_ == o.sizes_; }

 private:
  std::vector<int> sizes_;
  std::vector<int> offsets_;
  std::vector<int> block_of_;
  int p_ = 0;
};

/// d x k indicator matrix A with exactly one 1 per row and disjoint column
/// supports, stored as the column index of every row.
class FactorLoading {
 public:
  FactorLoading() = default;
  FactorLoading(std::vector<int> column_of_row, int cols);

  /// A = I_d.
  static FactorLoading identity(Eigen::Index d);

  Eigen::Index rows() const { return static_cast<Eigen::Index>(column_of_row_.size()); }
  Eigen::Index cols() const { return cols_; }
  int column_of_row(Eigen::Index r) const { return column_of_row_[r]; }
  /// Diagonal of A'A.
  const std::vector<int>& column_counts() const { return counts_; }
  bool is_identity() const;

  Matrix dense() const;

  /// A zeta.
  Vector expand(const Vector& zeta) const;
  /// (A'A)^{-1} A' y, i.e. the mean of y over each column's support.
  Vector condense(const Vector& y) const;

  bool operator==(const FactorLoading& o) const {
    return cols_ == o.cols_ && column_of_row_ == o.column_of_row_;
  }

 private:
  std::vector<int> column_of_row_;
  std::vector<int> counts_;
  int cols_ = 0;
};

/// Block pair (i, j), i >= j, that each loading column stands for.
std::vector<std::pair<int, int>> loading_columns(const BlockPartition& part);

/// Columns: within-block pairs (i,i) for blocks with p_i >= 2 in ascending
/// order, then between-block pairs (2,1),(3,1),...,(b,1),(3,2),... .
FactorLoading build_loading(const BlockPartition& part);

/// Symmetric b x b correlation parameters; diagonal entries of singleton
/// blocks are ignored.
struct BlockCorrParams {
  Matrix rho;
};

/// Reads the block parameters off a p x p matrix with block structure.
BlockCorrParams block_params_from_matrix(const Matrix& c, const BlockPartition& part);

/// The dense p x p block correlation matrix.
Matrix dense_block_matrix(const BlockCorrParams& rho, const BlockPartition& part);

/// a_ii = 1 + (p_i - 1) rho_ii, a_ij = rho_ij sqrt(p_i p_j).
Matrix companion(const BlockCorrParams& rho, const BlockPartition& part);

struct Validity {
  bool valid = false;
  std::string reason;
  double min_companion_eigenvalue = 0.0;
};

Validity is_valid(const BlockCorrParams& rho, const BlockPartition& part);

/// Compact form of C^{-1}: block (i,j) equals
/// a_sharp(i,j) P[i,j] + 1{i=j} within(i) (I - P[i,i]), P entries 1/sqrt(p_i p_j).
struct BlockInverse {
  Matrix a_sharp;
  Vector within;  // 1/(1 - rho_ii), zero for singleton blocks
  BlockPartition part;

  Matrix dense() const;
};

/// Factorized block correlation matrix; construction validates the
/// parameters and throws DomainError when C is not positive definite.
class BlockCorrelation {
 public:
  BlockCorrelation(const BlockCorrParams& rho, const BlockPartition& part);

  double det() const;
  double log_det() const { return log_det_; }
  BlockInverse inverse() const;
  /// z' C^{-1} z in O(p + b^2).
  double quadform(const Vector& z) const;

 private:
  BlockPartition part_;
  Eigen::LLT<Matrix> companion_llt_;
  Matrix a_sharp_;
  Vector within_;
  double log_det_ = 0.0;
};

double block_det(const BlockCorrParams& rho, const BlockPartition& part);
BlockInverse block_inverse(const BlockCorrParams& rho, const BlockPartition& part);
double block_quadform(const Vector& z, const BlockCorrParams& rho, const BlockPartition& part);

}  // namespace mrg
