#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "fastqm/error.hpp"
#include "fastqm/eval.hpp"
#include "fastqm/synth.hpp"
#include "helpers.hpp"

using namespace fastqm;

TEST_CASE("relative error") {
  Eigen::MatrixXd S(2, 1), A(2, 1);
  S << 3, 4;
  A << 3, 0;
  CHECK(relative_error(S, A) == doctest::Approx(0.8));
  CHECK(relative_error(S, S) == 0.0);
  CHECK(relative_error(S, Eigen::MatrixXd::Zero(2, 1)) == doctest::Approx(1.0));
  CHECK_THROWS_AS(relative_error(Eigen::MatrixXd::Zero(2, 1), S), InputError);
  CHECK_THROWS_AS(relative_error(S, Eigen::MatrixXd::Zero(2, 2)), InputError);
}

TEST_CASE("reconstruction of reference columns and full-rank models") {
  std::mt19937_64 rng(20);
  const SnapshotSet train = center(testing::gaussian(8, 5, rng), Centering::mean);
  const CandidateBasis basis = candidate_basis(train, 4);
  const QuadraticManifoldModel m = fit_pod_qm(basis, 2, 2, 1e-3);
  const Eigen::MatrixXd at_ref = m.reference.replicate(1, 3);
  CHECK(reconstruct_set(m, center(at_ref, Centering::zero)) == at_ref);

  const SnapshotSet tall = center(testing::gaussian(10, 4, rng), Centering::zero);
  const CandidateBasis full = candidate_basis(tall, 4);
  CHECK(evaluate(fit_pod(full, 4), tall).relative_frobenius <= 1e-8);
}

TEST_CASE("evaluate on the parabola") {
  const SnapshotSet S = gen_parabola(25);
  const CandidateBasis basis = candidate_basis(S, 2);
  const ErrorReport pod = evaluate(fit_pod(basis, 1), S, 2);
  CHECK(pod.relative_frobenius == doctest::Approx(0.3732).epsilon(0.002 / 0.3732));
  const ErrorReport qm = evaluate(fit_pod_qm(basis, 1, 1, 0.0), S, 2);
  CHECK(qm.relative_frobenius == doctest::Approx(0.3659).epsilon(0.002 / 0.3659));
  SolverConfig cfg;
  cfg.grad_tol = 1e-4;
  const ErrorReport fq = evaluate(fit_fastqm(basis, 1, 1, 0.0, cfg).model, S, 2);
  CHECK(fq.relative_frobenius < 1e-3);
  CHECK(fq.params.m == 2);
  CHECK(fq.method == Method::riemannian_qm);
  // Summary and per-snapshot errors describe the same residual.
  CHECK(pod.relative_frobenius * pod.relative_frobenius * pod.test_norm * pod.test_norm ==
        doctest::Approx(pod.per_snapshot_l2.squaredNorm()).epsilon(1e-10));
}

TEST_CASE("test data with a different reference") {
  std::mt19937_64 rng(21);
  const Eigen::MatrixXd raw = testing::gaussian(6, 9, rng);
  const SnapshotSet train = center(raw, Centering::mean);
  const CandidateBasis basis = candidate_basis(train, 3);
  const QuadraticManifoldModel m = fit_pod_qm(basis, 2, 1, 1e-2);
  const ErrorReport a = evaluate(m, train);
  const ErrorReport b = evaluate(m, center(raw, Centering::zero));
  CHECK(a.relative_frobenius == doctest::Approx(b.relative_frobenius).epsilon(1e-12));
}

TEST_CASE("sweep") {
  const PolyManifold pm = gen_poly_manifold(30, 2, 40, 3);
  const SnapshotSet& S = pm.snapshots;
  const CandidateBasis basis = candidate_basis(S, 6);

  SweepGrid one{{2}, {3}, {5}, {0.0}};
  SweepOptions opts;
  const auto rows = sweep(basis, S, S, one, opts);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].status == PointStatus::ok);
  const CandidateBasis b5 = truncate(basis, 5);
  CHECK(rows[0].find(Method::pod_qm)->test_error ==
        doctest::Approx(evaluate(fit_pod_qm(b5, 2, 3, 0.0), S).relative_frobenius).epsilon(1e-12));
  CHECK(rows[0].find(Method::riemannian_qm)->test_error ==
        doctest::Approx(evaluate(fit_fastqm(b5, 2, 3, 0.0, opts.solver).model, S).relative_frobenius).epsilon(1e-10));

  SweepGrid grid{{1, 2, 3}, {1, 3}, {3, 6}, {0.0}};
  opts.threads = 3;
  const auto all = sweep(basis, S, S, grid, opts);
  CHECK(all.size() == 12);
  int infeasible = 0;
  for (const auto& row : all) {
    if (row.params.r + row.params.q > row.params.m) {
      CHECK(row.status == PointStatus::infeasible);
      ++infeasible;
      continue;
    }
    CHECK(row.status == PointStatus::ok);
    const double pod = row.find(Method::pod_only)->train_error;
    const double qm = row.find(Method::pod_qm)->train_error;
    const double fq = row.find(Method::riemannian_qm)->train_error;
    CHECK(qm <= pod + 1e-10);
    CHECK(fq <= qm + 1e-10);
  }
  CHECK(infeasible > 0);

  opts.threads = 1;
  const auto serial = sweep(basis, S, S, grid, opts);
  for (std::size_t i = 0; i < all.size(); ++i) {
    CHECK(serial[i].params.r == all[i].params.r);
    CHECK(serial[i].params.m == all[i].params.m);
    for (std::size_t k = 0; k < all[i].outcomes.size(); ++k) {
      CHECK(serial[i].outcomes[k].status == all[i].outcomes[k].status);
      if (all[i].outcomes[k].status == PointStatus::ok)
        CHECK(serial[i].outcomes[k].test_error == all[i].outcomes[k].test_error);
    }
  }

  std::ostringstream csv;
  write_sweep_csv(csv, all, grid);
  const std::string text = csv.str();
  CHECK(text.rfind("r,q,m,error_pod,error_qm,error_greedy,error_riemannian,status\n", 0) == 0);
  CHECK(text.find("infeasible") != std::string::npos);
  CHECK(swept_axes(SweepGrid{{1, 2}, {0}, {4}, {0.0}}) == std::vector<std::string>{"r"});
  std::ostringstream detail;
  write_sweep_detail_csv(detail, all);
  CHECK(detail.str().find("needs q >= 1 and r + q <= m") != std::string::npos);
}
