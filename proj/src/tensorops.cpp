#include "fastqm/tensorops.hpp"

#include <cmath>
#include <string>

#include "fastqm/error.hpp"

namespace fastqm {

QuadIndexMap::QuadIndexMap(Eigen::Index r) : r_(r) {
  if (r < 1) {
    throw InputError("QuadIndexMap: reduced dimension must be >= 1, got " + std::to_string(r));
  }
  pairs_.reserve(static_cast<std::size_t>(quad_dim(r)));
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = i; j < r; ++j) pairs_.emplace_back(i, j);
  }
}

Eigen::Index QuadIndexMap::index_of(Eigen::Index i, Eigen::Index j) const {
  if (i > j) std::swap(i, j);
  if (i < 0 || j >= r_) throw InputError("QuadIndexMap: index out of range");
  // rows 0..i-1 contribute r, r-1, ..., r-i+1 entries
  return i * r_ - i * (i - 1) / 2 + (j - i);
}

Eigen::VectorXd compressed_square(const Eigen::Ref<const Eigen::VectorXd>& x) {
  const Eigen::Index r = x.size();
  if (r < 1) throw InputError("compressed_square: empty vector");
  Eigen::VectorXd out(quad_dim(r));
  Eigen::Index p = 0;
  for (Eigen::Index i = 0; i < r; ++i) {
    const Eigen::Index len = r - i;
    out.segment(p, len) = x(i) * x.tail(len);
    p += len;
  }
  return out;
}

Eigen::MatrixXd khatri_rao_square(const Eigen::Ref<const Eigen::MatrixXd>& X) {
  const Eigen::Index r = X.rows();
  if (r < 1) throw InputError("khatri_rao_square: matrix has no rows");
  Eigen::MatrixXd out(quad_dim(r), X.cols());
  Eigen::Index p = 0;
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = i; j < r; ++j, ++p) {
      out.row(p) = X.row(i).cwiseProduct(X.row(j));
    }
  }
  return out;
}

Eigen::Index reduced_dim_from_quad(Eigen::Index n) {
  // r(r+1)/2 = n  =>  r = (sqrt(8n+1) - 1) / 2
  const auto r = static_cast<Eigen::Index>(std::llround((std::sqrt(8.0 * static_cast<double>(n) + 1.0) - 1.0) / 2.0));
  if (r < 1 || quad_dim(r) != n) {
    throw InputError("length " + std::to_string(n) + " is not of the form r(r+1)/2");
  }
  return r;
}

Eigen::VectorXd expand_to_full(const Eigen::Ref<const Eigen::VectorXd>& w) {
  const Eigen::Index r = reduced_dim_from_quad(w.size());
  Eigen::VectorXd full(r * r);
  Eigen::Index p = 0;
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = i; j < r; ++j, ++p) {
      full(i * r + j) = w(p);
      full(j * r + i) = w(p);
    }
  }
  return full;
}

}  // namespace fastqm
