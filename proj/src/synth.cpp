#include "fastqm/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "fastqm/error.hpp"
#include "fastqm/eval.hpp"
#include "fastqm/qmfit.hpp"
#include "fastqm/tensorops.hpp"

namespace fastqm {

SnapshotSet gen_parabola(Eigen::Index samples) {
  if (samples < 2) throw InputError("gen_parabola: need at least 2 samples");
  const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(samples, -0.75, 1.25);
  Eigen::MatrixXd raw(2, samples);
  raw.row(0) = t.transpose();
  raw.row(1) = t.array().square().matrix().transpose();
  return center(raw, Centering::zero);
}

PolyManifold gen_poly_manifold(Eigen::Index N, Eigen::Index r_true, Eigen::Index samples, std::uint64_t seed,
                               double quadratic_scale) {
  if (r_true < 1) throw InputError("gen_poly_manifold: r_true must be >= 1");
  if (samples < 2) throw InputError("gen_poly_manifold: need at least 2 samples");
  const Eigen::Index P = quad_dim(r_true);
  if (N < r_true + P) {
    throw InputError("gen_poly_manifold: N = " + std::to_string(N) + " is below r_true(r_true+3)/2 = " +
                     std::to_string(r_true + P));
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);

  Eigen::MatrixXd G(N, r_true + P);
  for (Eigen::Index j = 0; j < G.cols(); ++j) {
    for (Eigen::Index i = 0; i < N; ++i) G(i, j) = gauss(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  const Eigen::MatrixXd frame = qr.householderQ() * Eigen::MatrixXd::Identity(N, r_true + P);

  PolyManifold out;
  out.U = frame.leftCols(r_true);
  out.V = frame.rightCols(P);
  out.H.resize(P, P);
  for (Eigen::Index j = 0; j < P; ++j) {
    for (Eigen::Index i = 0; i < P; ++i) out.H(i, j) = gauss(rng);
  }
  out.latent.resize(r_true, samples);
  for (Eigen::Index k = 0; k < samples; ++k) {
    for (Eigen::Index i = 0; i < r_true; ++i) out.latent(i, k) = unif(rng);
  }
  // Largest singular value of the quadratic part = quadratic_scale / 2 * smallest of the linear part.
  const double lin_min = Eigen::JacobiSVD<Eigen::MatrixXd>(out.latent).singularValues().minCoeff();
  const double quad_max =
      Eigen::JacobiSVD<Eigen::MatrixXd>(out.H * khatri_rao_square(out.latent)).singularValues().maxCoeff();
  out.H *= quad_max > 0 ? quadratic_scale * 0.5 * lin_min / quad_max : 0.0;
  const Eigen::MatrixXd raw = out.U * out.latent + out.V * (out.H * khatri_rao_square(out.latent));
  out.snapshots = center(raw, Centering::zero);
  return out;
}

namespace {

// Flip singular vectors so the first nonzero entry of each is negative.
void orient(Eigen::MatrixXd& V) {
  for (Eigen::Index j = 0; j < V.cols(); ++j) {
    for (Eigen::Index i = 0; i < V.rows(); ++i) {
      if (V(i, j) != 0.0) {
        if (V(i, j) > 0) V.col(j) = -V.col(j);
        break;
      }
    }
  }
}

}  // namespace

std::vector<RotationSample> rotation_sweep(const SnapshotSet& S, const std::vector<double>& angles, double gamma) {
  if (S.state_dim() != 2) {
    throw InputError("rotation_sweep: requires two-dimensional states, got N = " + std::to_string(S.state_dim()));
  }
  CandidateBasis basis = candidate_basis(S, 2, SvdRoute::direct);
  orient(basis.V_tilde);

  std::vector<RotationSample> out;
  out.reserve(angles.size());
  for (double theta : angles) {
    Eigen::Matrix2d Q;
    Q << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    const Eigen::MatrixXd V = basis.V_tilde * Q;
    const Eigen::MatrixXd s_hat = V.col(0).transpose() * S.data;
    const Eigen::MatrixXd W = khatri_rao_square(s_hat);
    const Eigen::MatrixXd Xi = solve_xi(V.col(1).transpose() * S.data, W, gamma);
    const Eigen::MatrixXd approx = V.col(0) * s_hat + V.col(1) * (Xi * W);
    out.push_back({theta, relative_error(S.data, approx)});
  }
  return out;
}

std::vector<double> angle_grid(double step) {
  if (!(step > 0)) throw InputError("angle_grid: step must be > 0");
  std::vector<double> out;
  const double two_pi = 2.0 * std::numbers::pi;
  for (long k = 0;; ++k) {
    const double theta = static_cast<double>(k) * step;
    if (theta >= two_pi) break;
    out.push_back(theta);
  }
  return out;
}

}  // namespace fastqm
