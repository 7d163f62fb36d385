#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fastqm/snapshots.hpp"

namespace fastqm {

/// Samples of the planar curve s(t) = [t, t^2] on a uniform grid over [-0.75, 1.25],
/// reference s(0) = 0 (zero centering).
SnapshotSet gen_parabola(Eigen::Index samples = 25);

struct PolyManifold {
  SnapshotSet snapshots;
  Eigen::MatrixXd U;        // N x r_true, linear directions
  Eigen::MatrixXd V;        // N x r_true(r_true+1)/2, orthogonal to U
  Eigen::MatrixXd H;        // quadratic coefficients
  Eigen::MatrixXd latent;   // r_true x samples, uniform on [-1, 1]
};

/// s_k = U a_k + V H compressed_square(a_k) with random orthonormal [U V],
/// Gaussian H and latent a_k ~ U[-1, 1]^r_true. Bit-reproducible for a given seed.
/// H is scaled so the largest singular value of the quadratic part is quadratic_scale / 2 times the smallest
/// singular value of the linear part (0 gives purely linear data).
PolyManifold gen_poly_manifold(Eigen::Index N, Eigen::Index r_true, Eigen::Index samples, std::uint64_t seed,
                               double quadratic_scale = 1.0);

struct RotationSample {
  double theta = 0.0;
  double relative_error = 0.0;
};

/// Training error of the two-mode quadratic manifold whose frame is the candidate
/// basis rotated by theta, for every angle. The candidate basis is oriented so
/// that the first entry of each singular vector is non-positive.
std::vector<RotationSample> rotation_sweep(const SnapshotSet& S, const std::vector<double>& angles, double gamma);

/// 0, step, 2 step, ... strictly below 2 pi.
std::vector<double> angle_grid(double step);

}  // namespace fastqm
