#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace fastqm {

/// Number of unique quadratic products of an r-vector, r(r+1)/2.
constexpr Eigen::Index quad_dim(Eigen::Index r) { return r * (r + 1) / 2; }

/// Ordering of the unique entries of x (x) x.
///
/// Pairs (i, j) with i <= j are listed in lexicographic order
/// (0,0), (0,1), ..., (0,r-1), (1,1), ..., (r-1,r-1). Indices are zero-based.
/// Cross products carry no extra scaling; any factor of 2 is absorbed by the
/// coefficient matrix fitted on top of these features.
class QuadIndexMap {
 public:
  explicit QuadIndexMap(Eigen::Index r);

  Eigen::Index r() const { return r_; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(pairs_.size()); }
  const std::vector<std::pair<Eigen::Index, Eigen::Index>>& pairs() const { return pairs_; }

  /// Position of pair (i, j) in the compressed layout; order of i and j is irrelevant.
  Eigen::Index index_of(Eigen::Index i, Eigen::Index j) const;

 private:
  Eigen::Index r_;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs_;
};

/// Unique entries of x (x) x in QuadIndexMap order.
Eigen::VectorXd compressed_square(const Eigen::Ref<const Eigen::VectorXd>& x);

/// Columnwise compressed Kronecker square: column k is compressed_square(X.col(k)).
Eigen::MatrixXd khatri_rao_square(const Eigen::Ref<const Eigen::MatrixXd>& X);

/// Scatter a compressed vector back to the full r*r Kronecker layout.
/// Entries (i, j) and (j, i) both receive w(i, j). r is inferred from the length.
Eigen::VectorXd expand_to_full(const Eigen::Ref<const Eigen::VectorXd>& w);

/// Inverse of quad_dim; throws InputError when n is not triangular.
Eigen::Index reduced_dim_from_quad(Eigen::Index n);

}  // namespace fastqm
