#pragma once

#include <cstdint>
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "fastqm/snapshots.hpp"
#include "fastqm/tensorops.hpp"
#include "fastqm/stiefel.hpp"

namespace testing {

inline Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) M(i, j) = d(rng);
  return M;
}

inline Eigen::MatrixXd orthonormal(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian(rows, cols, rng));
  return qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
}

inline fastqm::StiefelPoint random_point(Eigen::Index m, Eigen::Index r, Eigen::Index q, std::mt19937_64& rng) {
  return fastqm::StiefelPoint(orthonormal(m, r + q, rng), r, q);
}

inline int uniform_int(int lo, int hi, std::mt19937_64& rng) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline std::filesystem::path temp_dir() {
  std::filesystem::path dir;
  if (const char* env = std::getenv("FASTQM_TEST_TMP")) {
    dir = env;
  } else {
    dir = std::filesystem::temp_directory_path() / "fastqm_tests";
  }
  std::filesystem::create_directories(dir);
  return dir;
}

// Dense normal-equation solve, independent of the Cholesky path.
inline Eigen::MatrixXd xi_oracle(const Eigen::MatrixXd& B, const Eigen::MatrixXd& W, double gamma) {
  Eigen::MatrixXd M = W * W.transpose() + gamma * Eigen::MatrixXd::Identity(W.rows(), W.rows());
  return M.fullPivLu().solve(W * B.transpose()).transpose();
}

// Features built by explicit loops.
inline Eigen::MatrixXd features(const Eigen::MatrixXd& A) {
  const Eigen::Index r = A.rows();
  Eigen::MatrixXd W(fastqm::quad_dim(r), A.cols());
  for (Eigen::Index k = 0; k < A.cols(); ++k) {
    Eigen::Index p = 0;
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = i; j < r; ++j) W(p++, k) = A(i, k) * A(j, k);
  }
  return W;
}

// Reduced cost for an arbitrary (not necessarily orthonormal) Q, Xi re-solved.
inline double reduced_oracle(const Eigen::MatrixXd& Q, Eigen::Index r, const Eigen::MatrixXd& S_tilde, double gamma) {
  const Eigen::MatrixXd A = Q.leftCols(r).transpose() * S_tilde;
  const Eigen::MatrixXd B = Q.rightCols(Q.cols() - r).transpose() * S_tilde;
  const Eigen::MatrixXd W = features(A);
  const Eigen::MatrixXd Xi = xi_oracle(B, W, gamma);
  const Eigen::MatrixXd XiW = Xi * W;
  return -A.squaredNorm() + XiW.squaredNorm() + gamma * Xi.squaredNorm() - 2.0 * B.cwiseProduct(XiW).sum();
}

// Regularized residual evaluated in the original state space.
inline double full_space_cost(const Eigen::MatrixXd& S, const Eigen::MatrixXd& V_r, const Eigen::MatrixXd& V_q,
                              const Eigen::MatrixXd& Xi, double gamma) {
  const Eigen::MatrixXd A = V_r.transpose() * S;
  return (S - V_r * A - V_q * Xi * features(A)).squaredNorm() + gamma * Xi.squaredNorm();
}

struct Instance {
  fastqm::SnapshotSet S;
  fastqm::CandidateBasis basis;
  Eigen::Index r, q;
  double gamma;
};

inline Instance random_instance(std::mt19937_64& rng, Eigen::Index m_max = 8) {
  for (;;) {
    const Eigen::Index r = uniform_int(1, 3, rng);
    const Eigen::Index q = uniform_int(1, 3, rng);
    if (r + q > m_max) continue;
    const Eigen::Index m = uniform_int(static_cast<int>(r + q), static_cast<int>(m_max), rng);
    const Eigen::Index K = uniform_int(static_cast<int>(std::max<Eigen::Index>(m, fastqm::quad_dim(r) + 1)), 20, rng);
    const Eigen::Index N = m + uniform_int(0, 6, rng);
    const fastqm::SnapshotSet S = fastqm::center(gaussian(N, K, rng), fastqm::Centering::zero);
    const double gamma = std::uniform_real_distribution<double>(0.0, 0.1)(rng);
    return {S, fastqm::candidate_basis(S, m), r, q, gamma};
  }
}

}  // namespace testing
