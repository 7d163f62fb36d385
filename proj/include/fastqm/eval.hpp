#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "fastqm/qmfit.hpp"
#include "fastqm/snapshots.hpp"
#include "fastqm/stiefel.hpp"

namespace fastqm {

struct FitParams {
  Eigen::Index r = 0;
  Eigen::Index q = 0;
  Eigen::Index m = 0;
  double gamma = 0.0;
};

struct ErrorReport {
  double relative_frobenius = 0.0;                // ||S_test - S_approx||_F / ||S_test||_F
  Eigen::VectorXd per_snapshot_l2;               // ||column error||_2
  Eigen::VectorXd per_snapshot_l2_normalized;    // divided by ||test column||_2 (inf for a zero column with error)
  double test_norm = 0.0;                        // ||S_test||_F
  Method method = Method::pod_only;
  FitParams params;
};

/// Raw-space reconstruction decode(encode(s)) of every snapshot in S_test.
/// Snapshots are re-centered with the model's reference when S_test uses another one.
Eigen::MatrixXd reconstruct_set(const QuadraticManifoldModel& model, const SnapshotSet& S_test);

/// ||S_test - S_approx||_F / ||S_test||_F; InputError on shape mismatch or zero-norm S_test.
double relative_error(const Eigen::Ref<const Eigen::MatrixXd>& S_test, const Eigen::Ref<const Eigen::MatrixXd>& S_approx);

/// Errors are measured on data centered by the model's reference.
ErrorReport evaluate(const QuadraticManifoldModel& model, const SnapshotSet& S_test, Eigen::Index m = 0);

struct SweepGrid {
  std::vector<Eigen::Index> r_values;
  std::vector<Eigen::Index> q_values{0};
  std::vector<Eigen::Index> m_values;
  std::vector<double> gamma_values{0.0};
};

enum class PointStatus { ok, infeasible, failed };

std::string_view to_string(PointStatus s);

struct MethodOutcome {
  Method method = Method::pod_only;
  PointStatus status = PointStatus::ok;
  double train_error = 0.0;
  double test_error = 0.0;
  int iterations = 0;
  std::string message;
};

struct SweepRow {
  FitParams params;
  PointStatus status = PointStatus::ok;  // infeasible if any requested method is infeasible, failed if any failed
  std::vector<MethodOutcome> outcomes;   // one per requested method, in request order

  const MethodOutcome* find(Method method) const;
};

struct SweepOptions {
  std::vector<Method> methods{Method::pod_only, Method::pod_qm, Method::greedy_qm, Method::riemannian_qm};
  SolverConfig solver;
  unsigned threads = 1;
};

/// One row per grid point (Cartesian product r x q x m x gamma, r fastest varying last).
/// `basis` must hold at least max(m_values) modes of the training data; smaller
/// m values use its leading modes. Infeasible points (r + q > m) are flagged,
/// fit failures are recorded, and the sweep always completes.
std::vector<SweepRow> sweep(const CandidateBasis& basis, const SnapshotSet& train, const SnapshotSet& test,
                            const SweepGrid& grid, const SweepOptions& options);

/// Names of the grid axes with more than one value, in r, q, m, gamma order ("r" when none vary).
std::vector<std::string> swept_axes(const SweepGrid& grid);

/// Figure-style table: swept axes, error_pod, error_qm, error_greedy, error_riemannian, status.
/// Errors are test errors; infeasible or missing cells are left empty.
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows, const SweepGrid& grid);

/// Long format: every parameter and every method outcome, train and test errors.
void write_sweep_detail_csv(std::ostream& os, const std::vector<SweepRow>& rows);

}  // namespace fastqm
