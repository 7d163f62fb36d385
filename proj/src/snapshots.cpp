#include "fastqm/snapshots.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fastqm/error.hpp"

namespace fastqm {

std::string_view to_string(Centering mode) {
  switch (mode) {
    case Centering::zero: return "zero";
    case Centering::mean: return "mean";
    case Centering::initial: return "initial";
    case Centering::custom: return "custom";
  }
  return "zero";
}

Centering parse_centering(std::string_view name) {
  if (name == "zero") return Centering::zero;
  if (name == "mean") return Centering::mean;
  if (name == "initial") return Centering::initial;
  if (name == "custom") return Centering::custom;
  throw InputError("unknown centering mode '" + std::string(name) + "' (expected zero|mean|initial|custom)");
}

Eigen::MatrixXd SnapshotSet::raw() const { return data.colwise() + reference; }

SnapshotSet center(const Eigen::Ref<const Eigen::MatrixXd>& raw, Centering mode,
                   const std::optional<Eigen::VectorXd>& custom_ref) {
  if (raw.rows() < 1 || raw.cols() < 1) {
    throw InputError("center: snapshot matrix must be at least 1x1, got " + std::to_string(raw.rows()) + "x" +
                     std::to_string(raw.cols()));
  }
  Eigen::VectorXd ref;
  switch (mode) {
    case Centering::zero: ref = Eigen::VectorXd::Zero(raw.rows()); break;
    case Centering::mean: ref = raw.rowwise().mean(); break;
    case Centering::initial: ref = raw.col(0); break;
    case Centering::custom:
      if (!custom_ref) throw InputError("center: custom centering requires a reference vector");
      if (custom_ref->size() != raw.rows()) {
        throw InputError("center: reference has length " + std::to_string(custom_ref->size()) + ", expected " +
                         std::to_string(raw.rows()));
      }
      ref = *custom_ref;
      break;
  }
  SnapshotSet out;
  out.data = raw.colwise() - ref;
  out.reference = std::move(ref);
  out.centering = mode;
  return out;
}

SnapshotSet center_with(const Eigen::Ref<const Eigen::MatrixXd>& raw, const Eigen::VectorXd& reference) {
  return center(raw, Centering::custom, reference);
}

namespace {

void require_finite(const Eigen::MatrixXd& S) {
  if (!S.allFinite()) throw NumericalError("SVD input contains NaN or Inf entries");
}

CandidateBasis direct_svd(const SnapshotSet& S, Eigen::Index m) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(S.data, Eigen::ComputeThinU);
  if (svd.info() != Eigen::Success) {
    throw NumericalError("SVD failed on " + std::to_string(S.data.rows()) + "x" + std::to_string(S.data.cols()) +
                         " snapshot matrix (||S||_F = " + std::to_string(S.data.norm()) + ")");
  }
  CandidateBasis b;
  b.V_tilde = svd.matrixU().leftCols(m);
  b.sigma = svd.singularValues();
  return b;
}

// Method of snapshots followed by a Rayleigh-Ritz cleanup of the leading block.
CandidateBasis gram_svd(const SnapshotSet& S, Eigen::Index m) {
  const Eigen::Index K = S.data.cols();
  const Eigen::MatrixXd gram = S.data.transpose() * S.data;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("eigendecomposition of the " + std::to_string(K) + "x" + std::to_string(K) +
                         " snapshot Gram matrix failed");
  }
  // eigenvalues ascending; reverse to descending
  const Eigen::VectorXd lambda = eig.eigenvalues().reverse();
  const Eigen::MatrixXd Z = eig.eigenvectors().rowwise().reverse().leftCols(m);

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(S.data * Z);
  const Eigen::MatrixXd Qthin = qr.householderQ() * Eigen::MatrixXd::Identity(S.data.rows(), m);

  const Eigen::MatrixXd projected = Qthin.transpose() * S.data;
  Eigen::JacobiSVD<Eigen::MatrixXd> small(projected, Eigen::ComputeFullU);
  if (small.info() != Eigen::Success) throw NumericalError("SVD of projected snapshot block failed");

  CandidateBasis b;
  b.V_tilde = Qthin * small.matrixU();
  b.sigma.resize(K);
  b.sigma.head(m) = small.singularValues();
  for (Eigen::Index i = m; i < K; ++i) {
    b.sigma(i) = std::min(std::sqrt(std::max(lambda(i), 0.0)), b.sigma(i - 1));
  }
  return b;
}

}  // namespace

CandidateBasis candidate_basis(const SnapshotSet& S, Eigen::Index m, SvdRoute route) {
  const Eigen::Index N = S.data.rows();
  const Eigen::Index K = S.data.cols();
  const Eigen::Index limit = std::min(N, K);
  if (m < 1 || m > limit) {
    throw InputError("candidate_basis: m must satisfy 1 <= m <= min(N, K) = " + std::to_string(limit) + ", got " +
                     std::to_string(m));
  }
  require_finite(S.data);
  if (route == SvdRoute::automatic) route = (N > 8 * K) ? SvdRoute::gram : SvdRoute::direct;

  CandidateBasis b = route == SvdRoute::gram ? gram_svd(S, m) : direct_svd(S, m);
  b.reference = S.reference;
  b.S_tilde = b.V_tilde.transpose() * S.data;
  b.total_energy = S.data.squaredNorm();
  return b;
}

CandidateBasis truncate(const CandidateBasis& basis, Eigen::Index m) {
  if (m < 1 || m > basis.m()) {
    throw InputError("truncate: m must lie in 1.." + std::to_string(basis.m()) + ", got " + std::to_string(m));
  }
  CandidateBasis out;
  out.reference = basis.reference;
  out.V_tilde = basis.V_tilde.leftCols(m);
  out.sigma = basis.sigma;
  out.S_tilde = basis.S_tilde.topRows(m);
  out.total_energy = basis.total_energy;
  return out;
}

double pod_projection_error(const CandidateBasis& basis, Eigen::Index r) {
  if (r < 0 || r > basis.m()) {
    throw InputError("pod_projection_error: r must lie in 0..m = " + std::to_string(basis.m()) + ", got " +
                     std::to_string(r));
  }
  const double total = basis.sigma.squaredNorm();
  if (total == 0.0) return 0.0;
  const double tail = basis.sigma.tail(basis.sigma.size() - r).squaredNorm();
  return std::sqrt(tail / total);
}

}  // namespace fastqm
