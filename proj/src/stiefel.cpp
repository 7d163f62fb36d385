#include "fastqm/stiefel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>
#include <tuple>

namespace fastqm {

namespace {

constexpr double kFeasibilityTol = 1e-10;

std::string shape(const Eigen::MatrixXd& A) { return std::to_string(A.rows()) + "x" + std::to_string(A.cols()); }

}  // namespace

StiefelPoint::StiefelPoint(Eigen::MatrixXd Q, Eigen::Index r, Eigen::Index q) : Q_(std::move(Q)), r_(r), q_(q) {
  if (r_ < 1 || q_ < 0) throw InputError("StiefelPoint: need r >= 1 and q >= 0");
  if (Q_.cols() != r_ + q_) {
    throw InputError("StiefelPoint: Q has " + std::to_string(Q_.cols()) + " columns, expected r + q = " +
                     std::to_string(r_ + q_));
  }
  if (r_ + q_ > Q_.rows()) {
    throw InputError("StiefelPoint: r + q = " + std::to_string(r_ + q_) + " exceeds m = " + std::to_string(Q_.rows()));
  }
  const double res = feasibility_residual();
  if (!(res <= kFeasibilityTol * std::sqrt(static_cast<double>(Q_.cols())))) {
    throw InputError("StiefelPoint: columns are not orthonormal (||Q^T Q - I||_F = " + std::to_string(res) + ")");
  }
}

StiefelPoint StiefelPoint::leading(Eigen::Index m, Eigen::Index r, Eigen::Index q) {
  return StiefelPoint(Eigen::MatrixXd::Identity(m, r + q), r, q);
}

double StiefelPoint::feasibility_residual() const {
  return (Q_.transpose() * Q_ - Eigen::MatrixXd::Identity(Q_.cols(), Q_.cols())).norm();
}

Eigen::MatrixXd sym(const Eigen::Ref<const Eigen::MatrixXd>& A) { return 0.5 * (A + A.transpose()); }

TangentVector project_tangent(const StiefelPoint& X, const Eigen::Ref<const Eigen::MatrixXd>& G) {
  if (G.rows() != X.Q().rows() || G.cols() != X.Q().cols()) {
    throw InputError("project_tangent: direction is " + std::to_string(G.rows()) + "x" + std::to_string(G.cols()) +
                     ", point is " + shape(X.Q()));
  }
  const Eigen::MatrixXd QtG = X.Q().transpose() * G;
  return {G - X.Q() * sym(QtG)};
}

StiefelPoint retract(const StiefelPoint& X, const TangentVector& Z, double step) {
  if (Z.Z.rows() != X.Q().rows() || Z.Z.cols() != X.Q().cols()) {
    throw InputError("retract: tangent is " + shape(Z.Z) + ", point is " + shape(X.Q()));
  }
  if (step == 0.0) return X;
  const Eigen::MatrixXd Y = X.Q() + step * Z.Z;
  const Eigen::Index p = Y.cols();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Y);
  const Eigen::MatrixXd R = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(Y.rows(), p);

  const double scale = Y.norm();
  for (Eigen::Index j = 0; j < p; ++j) {
    const double d = R(j, j);
    if (!(std::abs(d) > 1e-13 * scale)) {
      throw NumericalError("retract: Q + step*Z is rank deficient (|R(" + std::to_string(j) + "," +
                           std::to_string(j) + ")| = " + std::to_string(std::abs(d)) + ")");
    }
    if (d < 0) Q.col(j) = -Q.col(j);
  }
  return StiefelPoint(std::move(Q), X.r(), X.q());
}

TangentVector transport(const StiefelPoint& X_new, const TangentVector& Z_old) { return project_tangent(X_new, Z_old.Z); }

void SolverConfig::validate() const {
  if (!(grad_tol > 0)) throw InputError("grad_tol must be > 0");
  if (max_iters < 1) throw InputError("max_iters must be >= 1");
  if (!(line_search.backtrack > 0 && line_search.backtrack < 1)) {
    throw InputError("line-search backtracking factor must lie in (0, 1)");
  }
  if (!(line_search.armijo > 0 && line_search.armijo < 1)) {
    throw InputError("Armijo slope constant must lie in (0, 1)");
  }
  if (!(line_search.initial_step > 0)) throw InputError("initial step must be > 0");
  if (line_search.max_backtracks < 1) throw InputError("max_backtracks must be >= 1");
  if (cg_restart_period < 1) throw InputError("cg_restart_period must be >= 1");
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::grad_tol: return "grad_tol";
    case Termination::max_iters: return "max_iters";
    case Termination::line_search_failure: return "line_search_failure";
  }
  return "max_iters";
}

MinimizeResult minimize(const CostAndGrad& cost_and_grad, const StiefelPoint& X0, const SolverConfig& cfg,
                        const IterateObserver& observer) {
  cfg.validate();
  const auto t_start = std::chrono::steady_clock::now();
  FitReport report;
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  };
  auto evaluate = [&](const StiefelPoint& X) {
    auto [f, egrad] = cost_and_grad(X);
    if (!std::isfinite(f) || !egrad.allFinite()) {
      report.wall_time = elapsed();
      throw OptimizerError("minimize: non-finite cost or gradient at iteration " +
                               std::to_string(report.iterations) + " (cost = " + std::to_string(f) + ")",
                           report);
    }
    if (egrad.rows() != X.Q().rows() || egrad.cols() != X.Q().cols()) {
      throw InputError("minimize: gradient is " + shape(egrad) + ", point is " + shape(X.Q()));
    }
    return std::pair<double, Eigen::MatrixXd>(f, std::move(egrad));
  };

  StiefelPoint x = X0;
  auto [f, egrad] = evaluate(x);
  const double scale = f != 0.0 ? std::abs(f) : 1.0;
  TangentVector g = project_tangent(x, egrad);
  double gnorm = g.Z.norm();
  report.cost_history.push_back(f / scale);
  report.grad_norm_history.push_back(gnorm);
  if (observer) observer(x, 0);

  if (gnorm <= cfg.grad_tol) {
    report.termination = Termination::grad_tol;
    report.wall_time = elapsed();
    return {std::move(x), std::move(report)};
  }

  const LineSearchConfig& ls = cfg.line_search;
  TangentVector d{-g.Z};
  double f_prev = 0.0;
  bool have_prev = false;
  report.termination = Termination::max_iters;

  for (int k = 1; k <= cfg.max_iters; ++k) {
    double slope = inner(g, d);
    if (!(slope < 0)) {
      d.Z = -g.Z;
      slope = -gnorm * gnorm;
    }

    // First trial step: reuse the last decrease (doubled) when available.
    double t = ls.initial_step / (1.0 + gnorm);
    if (have_prev) {
      const double guess = 4.0 * (f - f_prev) / slope;
      if (std::isfinite(guess) && guess > 0) t = guess;
    }

    bool accepted = false;
    StiefelPoint x_new = x;
    double f_new = f;
    Eigen::MatrixXd egrad_new;
    for (int bt = 0; bt <= ls.max_backtracks; ++bt, t *= ls.backtrack) {
      try {
        x_new = retract(x, d, t);
      } catch (const NumericalError&) {
        continue;
      }
      std::tie(f_new, egrad_new) = evaluate(x_new);
      if (f_new <= f + ls.armijo * t * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      report.termination = Termination::line_search_failure;
      break;
    }

    TangentVector g_new = project_tangent(x_new, egrad_new);
    const double gnorm_new = g_new.Z.norm();

    double beta = 0.0;
    if (k % cfg.cg_restart_period != 0) {
      const TangentVector g_old = transport(x_new, g);
      beta = std::max(0.0, (g_new.Z.cwiseProduct(g_new.Z - g_old.Z)).sum() / (gnorm * gnorm));
    }
    d.Z = -g_new.Z + beta * transport(x_new, d).Z;

    f_prev = f;
    have_prev = true;
    x = std::move(x_new);
    f = f_new;
    g = std::move(g_new);
    gnorm = gnorm_new;

    report.iterations = k;
    report.cost_history.push_back(f / scale);
    report.grad_norm_history.push_back(gnorm);
    if (observer) observer(x, k);

    if (gnorm <= cfg.grad_tol) {
      report.termination = Termination::grad_tol;
      break;
    }
  }
  report.wall_time = elapsed();
  return {std::move(x), std::move(report)};
}

}  // namespace fastqm
