#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "fastqm/snapshots.hpp"
#include "fastqm/stiefel.hpp"

namespace fastqm {

enum class Method { pod_only, pod_qm, greedy_qm, riemannian_qm };

std::string_view to_string(Method method);

/// Accepts the canonical names and the CLI spellings pod|qm|greedy|riemannian.
Method parse_method(std::string_view name);

/// Coordinates of V_r and V_q in the candidate basis: V_r = V_tilde Q_r, V_q = V_tilde Q_q.
struct CandidateFactor {
  Eigen::MatrixXd Q_r;  // m x r
  Eigen::MatrixXd Q_q;  // m x q
};

/// s ~ reference + V_r s_hat + V_q Xi compressed_square(s_hat), s_hat = V_r^T (s - reference).
struct QuadraticManifoldModel {
  Eigen::VectorXd reference;
  Eigen::MatrixXd V_r;
  Eigen::MatrixXd V_q;  // N x 0 for pod_only
  Eigen::MatrixXd Xi;   // q x r(r+1)/2, empty for pod_only
  double gamma = 0.0;
  Method method = Method::pod_only;
  std::optional<CandidateFactor> factor;

  Eigen::Index state_dim() const { return V_r.rows(); }
  Eigen::Index r() const { return V_r.cols(); }
  Eigen::Index q() const { return V_q.cols(); }

  /// Checks orthonormality, mutual orthogonality and shape consistency; throws InputError.
  void validate() const;
};

/// Regularized normal equations Xi (W W^T + gamma I) = S_hat_q W^T, via Cholesky.
/// At gamma == 0 a numerically singular W W^T is refused with NumericalError.
Eigen::MatrixXd solve_xi(const Eigen::Ref<const Eigen::MatrixXd>& S_hat_q, const Eigen::Ref<const Eigen::MatrixXd>& W,
                         double gamma);

/// Linear POD: V_r = leading r candidate modes, no quadratic part.
QuadraticManifoldModel fit_pod(const CandidateBasis& basis, Eigen::Index r);

/// Leading r modes for the linear part, modes r+1..r+q for the quadratic part.
QuadraticManifoldModel fit_pod_qm(const CandidateBasis& basis, Eigen::Index r, Eigen::Index q, double gamma);

struct FeatureObjective {
  double cost = 0.0;           // -||Q_r^T S~||^2 + ||Xi W||^2 + gamma ||Xi||^2 - 2 Tr(S~^T Q_q Xi W)
  Eigen::MatrixXd euclid_grad;  // d cost / d [Q_r Q_q], Xi held at its minimizer
  Eigen::MatrixXd Xi;
};

/// Reduced objective on the candidate coordinates. Adding ||S||_F^2 to cost
/// gives the full-space regularized residual at (Xi, V_tilde Q_r, V_tilde Q_q).
FeatureObjective feature_objective(const StiefelPoint& point, const Eigen::Ref<const Eigen::MatrixXd>& S_tilde,
                                   double gamma);

struct FastQmResult {
  QuadraticManifoldModel model;
  FitReport report;
};

/// Riemannian optimization of [Q_r Q_q] starting from the leading candidate modes.
///
/// The optimizer sees the objective divided by ||S||_F^2, so grad_tol is
/// scale independent.
FastQmResult fit_fastqm(const CandidateBasis& basis, Eigen::Index r, Eigen::Index q, double gamma,
                        const SolverConfig& cfg, const IterateObserver& observer = {});

struct GreedyTrace {
  std::vector<Eigen::Index> selected_indices;  // zero-based candidate indices j_1..j_r
  std::vector<double> objective_history;       // minimized selection objective per iteration
};

struct GreedyResult {
  QuadraticManifoldModel model;
  GreedyTrace trace;
};

/// Objective of one greedy step: linear modes `linear`, quadratic modes = every
/// candidate not in `linear`. Equals the full-space residual plus gamma ||Xi||^2.
double greedy_step_objective(const CandidateBasis& basis, const std::vector<Eigen::Index>& linear, double gamma);

/// Greedy selection of r linear modes; the quadratic part then uses the q
/// unselected modes with largest singular values.
GreedyResult fit_greedy(const CandidateBasis& basis, Eigen::Index r, Eigen::Index q, double gamma);

/// s_hat = V_r^T (s - reference)
Eigen::VectorXd encode(const QuadraticManifoldModel& model, const Eigen::Ref<const Eigen::VectorXd>& s);

/// reference + V_r s_hat + V_q Xi compressed_square(s_hat)
Eigen::VectorXd decode(const QuadraticManifoldModel& model, const Eigen::Ref<const Eigen::VectorXd>& s_hat);

/// Column-wise encode of centered data (no reference subtraction).
Eigen::MatrixXd encode_centered(const QuadraticManifoldModel& model, const Eigen::Ref<const Eigen::MatrixXd>& S);

/// Column-wise decode without the reference (centered output).
Eigen::MatrixXd decode_centered(const QuadraticManifoldModel& model, const Eigen::Ref<const Eigen::MatrixXd>& S_hat);

/// Training relative error ||S - S_approx||_F / ||S||_F computed in candidate
/// coordinates; requires model.factor built on the same basis.
double training_error(const QuadraticManifoldModel& model, const CandidateBasis& basis);

}  // namespace fastqm
