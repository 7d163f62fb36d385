#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "fastqm/error.hpp"
#include "fastqm/snapshots.hpp"
#include "helpers.hpp"

using namespace fastqm;

namespace {

SnapshotSet diag321() {
  Eigen::MatrixXd D = Eigen::Vector3d(3, 2, 1).asDiagonal();
  return center(D, Centering::zero);
}

}  // namespace

TEST_CASE("centering modes") {
  Eigen::Vector3d c(1, -2, 0.5);
  Eigen::MatrixXd same = c.replicate(1, 4);
  const SnapshotSet s = center(same, Centering::mean);
  CHECK(s.data.norm() == 0.0);
  CHECK(s.reference == c);

  std::mt19937_64 rng(4);
  const Eigen::MatrixXd raw = testing::gaussian(4, 6, rng);
  const SnapshotSet z = center(raw, Centering::zero);
  CHECK(z.data == raw);
  CHECK(z.reference.isZero(0.0));

  const SnapshotSet m = center(raw, Centering::mean);
  CHECK(m.data.rowwise().sum().cwiseAbs().maxCoeff() < 1e-12 * raw.cwiseAbs().maxCoeff() * 6);
  CHECK((m.raw() - raw).norm() < 1e-14);

  const SnapshotSet i = center(raw, Centering::initial);
  CHECK(i.data.col(0).isZero(0.0));
  CHECK(i.reference == raw.col(0));

  Eigen::VectorXd ref = Eigen::VectorXd::Ones(4);
  const SnapshotSet u = center(raw, Centering::custom, ref);
  CHECK((u.data - (raw.colwise() - ref)).norm() == 0.0);
  CHECK_THROWS_AS(center(raw, Centering::custom), InputError);
  CHECK_THROWS_AS(center(raw, Centering::custom, Eigen::VectorXd::Ones(3)), InputError);
}

TEST_CASE("centering names") {
  for (auto mode : {Centering::zero, Centering::mean, Centering::initial, Centering::custom})
    CHECK(parse_centering(to_string(mode)) == mode);
  CHECK_THROWS_AS(parse_centering("median"), InputError);
}

TEST_CASE("candidate basis of a diagonal matrix") {
  for (auto route : {SvdRoute::direct, SvdRoute::gram}) {
    const CandidateBasis b = candidate_basis(diag321(), 2, route);
    CHECK(b.m() == 2);
    CHECK(b.sigma(0) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(b.sigma(1) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(b.V_tilde.cwiseAbs().isApprox(Eigen::MatrixXd::Identity(3, 2), 1e-12));
    CHECK(b.total_energy == doctest::Approx(14.0));
    CHECK((b.S_tilde - b.V_tilde.transpose() * diag321().data).norm() < 1e-12);
  }
}

TEST_CASE("rank-one snapshots") {
  std::mt19937_64 rng(5);
  const Eigen::VectorXd s = testing::gaussian(7, 1, rng);
  const Eigen::VectorXd v = testing::gaussian(5, 1, rng);
  const SnapshotSet S = center(s * v.transpose(), Centering::zero);
  for (auto route : {SvdRoute::direct, SvdRoute::gram}) {
    const CandidateBasis b = candidate_basis(S, 3, route);
    CHECK(b.sigma(0) == doctest::Approx(s.norm() * v.norm()).epsilon(1e-12));
    CHECK(std::abs(b.sigma(1)) < 1e-10 * b.sigma(0));
    CHECK((b.V_tilde.transpose() * b.V_tilde - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-10);
  }
}

TEST_CASE("full basis reproduces the data; routes agree") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::Index N = testing::uniform_int(6, 40, rng);
    const Eigen::Index K = testing::uniform_int(2, 6, rng);
    const SnapshotSet S = center(testing::gaussian(N, K, rng), Centering::mean);
    const CandidateBasis d = candidate_basis(S, K, SvdRoute::direct);
    const CandidateBasis g = candidate_basis(S, K, SvdRoute::gram);
    CHECK((d.V_tilde * d.V_tilde.transpose() * S.data - S.data).norm() <= 1e-8 * S.data.norm());
    CHECK((g.V_tilde * g.V_tilde.transpose() * S.data - S.data).norm() <= 1e-8 * S.data.norm());
    // Leading modes agree up to sign when the spectrum is simple.
    const Eigen::Index k = K - 1;
    CHECK((d.sigma.head(k) - g.sigma.head(k)).norm() < 1e-9 * d.sigma(0));
    for (Eigen::Index j = 0; j < k; ++j) {
      CHECK(std::abs(std::abs(d.V_tilde.col(j).dot(g.V_tilde.col(j))) - 1.0) < 1e-6);
    }
  }
}

TEST_CASE("candidate basis errors") {
  CHECK_THROWS_AS(candidate_basis(diag321(), 0), InputError);
  CHECK_THROWS_AS(candidate_basis(diag321(), 4), InputError);
  SnapshotSet bad = diag321();
  bad.data(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(candidate_basis(bad, 2), NumericalError);
}

TEST_CASE("pod projection error") {
  const CandidateBasis b = candidate_basis(diag321(), 3);
  CHECK(pod_projection_error(b, 3) == doctest::Approx(0.0));
  CHECK(pod_projection_error(b, 0) == doctest::Approx(1.0));
  CHECK(pod_projection_error(b, 2) == doctest::Approx(std::sqrt(1.0 / 14.0)).epsilon(1e-12));
  // Truncation keeps the full spectrum, so the tail still counts.
  const CandidateBasis t = truncate(b, 2);
  CHECK(t.m() == 2);
  CHECK(pod_projection_error(t, 2) == doctest::Approx(std::sqrt(1.0 / 14.0)).epsilon(1e-12));
}
