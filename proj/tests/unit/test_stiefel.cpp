#include <doctest.h>

#include <cmath>
#include <random>

#include "fastqm/error.hpp"
#include "fastqm/stiefel.hpp"
#include "helpers.hpp"

using namespace fastqm;

namespace {

double sym_norm(const StiefelPoint& X, const Eigen::MatrixXd& Z) { return sym(X.Q().transpose() * Z).norm(); }

}  // namespace

TEST_CASE("point validation") {
  CHECK_NOTHROW(StiefelPoint(Eigen::MatrixXd::Identity(4, 3), 1, 2));
  CHECK_THROWS_AS(StiefelPoint(Eigen::MatrixXd::Identity(4, 3), 2, 2), InputError);
  CHECK_THROWS_AS(StiefelPoint(Eigen::MatrixXd::Identity(4, 3), 0, 3), InputError);
  CHECK_THROWS_AS(StiefelPoint(2.0 * Eigen::MatrixXd::Identity(4, 3), 1, 2), InputError);
  const StiefelPoint X = StiefelPoint::leading(5, 2, 1);
  CHECK(X.Q() == Eigen::MatrixXd::Identity(5, 3));
  CHECK(X.Q_r().cols() == 2);
  CHECK(X.Q_q().cols() == 1);
}

TEST_CASE("tangent projection") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const StiefelPoint X = testing::random_point(7, 2, 2, rng);
    const Eigen::MatrixXd G = testing::gaussian(7, 4, rng);
    const TangentVector Z = project_tangent(X, G);
    CHECK(sym_norm(X, Z.Z) < 1e-10);
    CHECK((project_tangent(X, Z.Z).Z - Z.Z).norm() <= 1e-12 * Z.Z.norm());
    const TangentVector T = project_tangent(X, testing::gaussian(7, 4, rng));
    CHECK(std::abs((G - Z.Z).cwiseProduct(T.Z).sum()) < 1e-10 * G.norm() * T.Z.norm());
    CHECK(project_tangent(X, X.Q()).Z.norm() < 1e-12);
  }
}

TEST_CASE("retraction") {
  std::mt19937_64 rng(8);
  const StiefelPoint X = testing::random_point(6, 2, 1, rng);
  const TangentVector Z = project_tangent(X, testing::gaussian(6, 3, rng));
  CHECK(retract(X, Z, 0.0).Q() == X.Q());

  const StiefelPoint e1(Eigen::Vector2d(1, 0), 1, 0);
  const StiefelPoint moved = retract(e1, TangentVector{Eigen::Vector2d(0, 1)}, 1.0);
  CHECK((moved.Q() - Eigen::Vector2d(1, 1) / std::sqrt(2.0)).norm() < 1e-15);

  for (int trial = 0; trial < 10; ++trial) {
    const StiefelPoint Y = testing::random_point(8, 2, 2, rng);
    const TangentVector V = project_tangent(Y, testing::gaussian(8, 4, rng));
    double prev = 0.0;
    for (int k = 0; k < 6; ++k) {
      const double eps = 1e-2 / std::pow(2.0, k);
      const StiefelPoint R = retract(Y, V, eps);
      CHECK(R.feasibility_residual() <= 1e-8 * 2.0);
      const double res = (R.Q() - (Y.Q() + eps * V.Z)).norm();
      if (k > 0) CHECK(res / prev == doctest::Approx(0.25).epsilon(0.05));
      prev = res;
    }
  }
}

TEST_CASE("vector transport") {
  std::mt19937_64 rng(9);
  const StiefelPoint X = testing::random_point(6, 1, 2, rng);
  const TangentVector Z = project_tangent(X, testing::gaussian(6, 3, rng));
  CHECK((transport(X, Z).Z - Z.Z).norm() <= 1e-12 * Z.Z.norm());
  CHECK(transport(X, TangentVector{Eigen::MatrixXd::Zero(6, 3)}).Z.norm() == 0.0);
  const StiefelPoint Y = retract(X, Z, 0.3);
  const TangentVector T = transport(Y, Z);
  CHECK(sym_norm(Y, T.Z) < 1e-12);
}

TEST_CASE("minimize recovers the dominant singular vector") {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::MatrixXd A = testing::gaussian(6, 9, rng);
    const double smax = Eigen::JacobiSVD<Eigen::MatrixXd>(A).singularValues()(0);
    CostAndGrad f = [&](const StiefelPoint& X) {
      const Eigen::MatrixXd AtQ = A.transpose() * X.Q();
      return std::pair<double, Eigen::MatrixXd>(-AtQ.squaredNorm(), -2.0 * A * AtQ);
    };
    SolverConfig cfg;
    cfg.grad_tol = 1e-6;
    cfg.max_iters = 2000;
    double worst = 0.0;
    const auto res = minimize(f, testing::random_point(6, 1, 0, rng), cfg,
                              [&](const StiefelPoint& X, int) { worst = std::max(worst, X.feasibility_residual()); });
    CHECK(worst <= 1e-8);
    CHECK(f(res.point).first == doctest::Approx(-smax * smax).epsilon(1e-6));
    CHECK(res.report.termination == Termination::grad_tol);
    CHECK(res.report.cost_history.size() == static_cast<std::size_t>(res.report.iterations) + 1);
  }
}

TEST_CASE("minimize with constant cost stops immediately") {
  CostAndGrad f = [](const StiefelPoint& X) {
    return std::pair<double, Eigen::MatrixXd>(3.0, Eigen::MatrixXd::Zero(X.ambient(), X.cols()));
  };
  const auto res = minimize(f, StiefelPoint::leading(4, 1, 1), SolverConfig{});
  CHECK(res.report.iterations == 0);
  CHECK(res.report.termination == Termination::grad_tol);
}

TEST_CASE("minimize reports non-finite costs") {
  CostAndGrad f = [](const StiefelPoint& X) {
    return std::pair<double, Eigen::MatrixXd>(std::nan(""), Eigen::MatrixXd::Zero(X.ambient(), X.cols()));
  };
  CHECK_THROWS_AS(minimize(f, StiefelPoint::leading(4, 1, 1), SolverConfig{}), OptimizerError);
}

TEST_CASE("solver config validation") {
  SolverConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.grad_tol = -1;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg = SolverConfig{};
  cfg.line_search.backtrack = 1.5;
  CHECK_THROWS_AS(cfg.validate(), InputError);
}
