#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace fastqm {

enum class Centering { zero, mean, initial, custom };

std::string_view to_string(Centering mode);
Centering parse_centering(std::string_view name);

/// Centered snapshot matrix. Column k is s(t_k) - reference.
struct SnapshotSet {
  Eigen::MatrixXd data;
  Eigen::VectorXd reference;
  Centering centering = Centering::zero;

  Eigen::Index state_dim() const { return data.rows(); }
  Eigen::Index num_snapshots() const { return data.cols(); }

  /// Raw snapshots, data + reference in every column.
  Eigen::MatrixXd raw() const;
};

/// Subtract a reference vector from every column of raw.
///
/// mode == custom requires custom_ref; mode == initial uses the first column.
SnapshotSet center(const Eigen::Ref<const Eigen::MatrixXd>& raw, Centering mode,
                   const std::optional<Eigen::VectorXd>& custom_ref = std::nullopt);

/// Center out-of-sample snapshots with an existing (training) reference.
SnapshotSet center_with(const Eigen::Ref<const Eigen::MatrixXd>& raw, const Eigen::VectorXd& reference);

enum class SvdRoute { automatic, direct, gram };

/// The m leading left singular vectors of a centered snapshot matrix and the
/// data expressed in them.
struct CandidateBasis {
  Eigen::VectorXd reference;  // s-bar of the snapshots the basis was built from
  Eigen::MatrixXd V_tilde;    // N x m, orthonormal columns
  Eigen::VectorXd sigma;      // full computed spectrum (length >= m), non-increasing
  Eigen::MatrixXd S_tilde;    // m x K, V_tilde^T S
  double total_energy = 0.0;  // ||S||_F^2

  Eigen::Index m() const { return V_tilde.cols(); }
  Eigen::Index state_dim() const { return V_tilde.rows(); }
  Eigen::Index num_snapshots() const { return S_tilde.cols(); }
};

/// Thin SVD of S.data truncated to m modes.
///
/// The Gram route ("method of snapshots") eigendecomposes S^T S, lifts the
/// eigenvectors, re-orthonormalizes them and finishes with a small SVD of
/// V^T S so that the leading singular values are accurate. automatic picks
/// the Gram route when N is much larger than K.
CandidateBasis candidate_basis(const SnapshotSet& S, Eigen::Index m, SvdRoute route = SvdRoute::automatic);

/// Keep only the first m modes of an existing basis (exact: they are the leading singular vectors).
CandidateBasis truncate(const CandidateBasis& basis, Eigen::Index m);

/// Relative POD projection error sqrt(sum_{i>r} sigma_i^2 / sum_i sigma_i^2).
double pod_projection_error(const CandidateBasis& basis, Eigen::Index r);

}  // namespace fastqm
