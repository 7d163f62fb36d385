#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fastqm/error.hpp"

namespace fastqm {

/// A point on St(m, r+q): an m x (r+q) matrix with orthonormal columns whose
/// leading r columns form the linear frame and trailing q the quadratic frame.
class StiefelPoint {
 public:
  /// Validates orthonormality and the split; throws InputError otherwise.
  StiefelPoint(Eigen::MatrixXd Q, Eigen::Index r, Eigen::Index q);

  /// [I_{r+q}; 0], the leading candidate modes.
  static StiefelPoint leading(Eigen::Index m, Eigen::Index r, Eigen::Index q);

  const Eigen::MatrixXd& Q() const { return Q_; }
  Eigen::Index r() const { return r_; }
  Eigen::Index q() const { return q_; }
  Eigen::Index ambient() const { return Q_.rows(); }
  Eigen::Index cols() const { return Q_.cols(); }

  auto Q_r() const { return Q_.leftCols(r_); }
  auto Q_q() const { return Q_.rightCols(q_); }

  /// ||Q^T Q - I||_F
  double feasibility_residual() const;

 private:
  Eigen::MatrixXd Q_;
  Eigen::Index r_;
  Eigen::Index q_;
};

/// Tangent direction at some StiefelPoint (the base is supplied explicitly by callers).
struct TangentVector {
  Eigen::MatrixXd Z;
};

/// sym(A) = (A + A^T) / 2
Eigen::MatrixXd sym(const Eigen::Ref<const Eigen::MatrixXd>& A);

/// Orthogonal projection onto the tangent space under the embedded metric: G - Q sym(Q^T G).
TangentVector project_tangent(const StiefelPoint& X, const Eigen::Ref<const Eigen::MatrixXd>& G);

/// QR retraction qf(Q + step Z) with R's diagonal made positive.
/// Throws NumericalError when Q + step Z is numerically rank deficient.
StiefelPoint retract(const StiefelPoint& X, const TangentVector& Z, double step);

/// Projection-based vector transport onto the tangent space at X_new.
TangentVector transport(const StiefelPoint& X_new, const TangentVector& Z_old);

/// Embedded-metric inner product.
inline double inner(const TangentVector& a, const TangentVector& b) { return a.Z.cwiseProduct(b.Z).sum(); }

struct LineSearchConfig {
  double initial_step = 1.0;
  double armijo = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 30;
};

struct SolverConfig {
  double grad_tol = 2e-4;
  int max_iters = 500;
  LineSearchConfig line_search;
  int cg_restart_period = 50;
  std::uint64_t seed = 0;  // reserved for random restarts; the default start is deterministic

  /// Throws InputError on out-of-range fields.
  void validate() const;
};

enum class Termination { grad_tol, max_iters, line_search_failure };

std::string_view to_string(Termination t);

struct FitReport {
  int iterations = 0;
  std::vector<double> cost_history;       // cost / |initial cost| (or raw cost when the initial cost is 0)
  std::vector<double> grad_norm_history;  // Riemannian gradient norm
  double wall_time = 0.0;                 // seconds
  Termination termination = Termination::max_iters;
};

/// Returns the cost and the Euclidean gradient (m x p) at a point.
using CostAndGrad = std::function<std::pair<double, Eigen::MatrixXd>(const StiefelPoint&)>;

/// Called with every accepted iterate, including the starting point (iteration 0).
using IterateObserver = std::function<void(const StiefelPoint&, int)>;

/// Non-finite cost or gradient during minimize; carries the history up to the failure.
class OptimizerError : public NumericalError {
 public:
  OptimizerError(const std::string& what, FitReport report) : NumericalError(what), report_(std::move(report)) {}
  const FitReport& report() const { return report_; }

 private:
  FitReport report_;
};

struct MinimizeResult {
  StiefelPoint point;
  FitReport report;
};

/// Riemannian conjugate gradients (Polak-Ribiere+, Armijo backtracking).
/// Throws OptimizerError when the cost or gradient becomes non-finite.
MinimizeResult minimize(const CostAndGrad& cost_and_grad, const StiefelPoint& X0, const SolverConfig& cfg,
                        const IterateObserver& observer = {});

}  // namespace fastqm
