#include "fastqm/qmfit.hpp"

#include <cmath>
#include <string>

#include "fastqm/error.hpp"
#include "fastqm/tensorops.hpp"

namespace fastqm {

namespace {

constexpr double kOrthoTol = 1e-8;

void require_orthonormal(const Eigen::MatrixXd& V, const char* name) {
  if (V.cols() == 0) return;
  const double res = (V.transpose() * V - Eigen::MatrixXd::Identity(V.cols(), V.cols())).norm();
  if (!(res <= kOrthoTol * std::sqrt(static_cast<double>(V.cols())))) {
    throw InputError(std::string(name) + " does not have orthonormal columns (residual " + std::to_string(res) + ")");
  }
}

void require_dims(const CandidateBasis& basis, Eigen::Index r, Eigen::Index q, const char* who) {
  if (r < 1) throw InputError(std::string(who) + ": r must be >= 1");
  if (q < 1) throw InputError(std::string(who) + ": q must be >= 1");
  if (r + q > basis.m()) {
    throw InputError(std::string(who) + ": r + q = " + std::to_string(r + q) + " exceeds the number of candidate modes m = " +
                     std::to_string(basis.m()));
  }
}

// Rows of A selected by idx.
Eigen::MatrixXd take_rows(const Eigen::MatrixXd& A, const std::vector<Eigen::Index>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), A.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = A.row(idx[k]);
  return out;
}

Eigen::MatrixXd selection(Eigen::Index m, const std::vector<Eigen::Index>& idx) {
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(m, static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) P(idx[k], static_cast<Eigen::Index>(k)) = 1.0;
  return P;
}

// Four-term reduced cost for given linear/quadratic coordinates and Xi.
double reduced_cost(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& XiW,
                    const Eigen::MatrixXd& Xi, double gamma) {
  return -A.squaredNorm() + XiW.squaredNorm() + gamma * Xi.squaredNorm() - 2.0 * B.cwiseProduct(XiW).sum();
}

QuadraticManifoldModel assemble(const CandidateBasis& basis, Eigen::MatrixXd Q_r, Eigen::MatrixXd Q_q,
                                Eigen::MatrixXd Xi, double gamma, Method method) {
  QuadraticManifoldModel model;
  model.reference = basis.reference;
  model.V_r = basis.V_tilde * Q_r;
  model.V_q = basis.V_tilde * Q_q;
  model.Xi = std::move(Xi);
  model.gamma = gamma;
  model.method = method;
  model.factor = CandidateFactor{std::move(Q_r), std::move(Q_q)};
  return model;
}

}  // namespace

std::string_view to_string(Method method) {
  switch (method) {
    case Method::pod_only: return "pod_only";
    case Method::pod_qm: return "pod_qm";
    case Method::greedy_qm: return "greedy_qm";
    case Method::riemannian_qm: return "riemannian_qm";
  }
  return "pod_only";
}

Method parse_method(std::string_view name) {
  if (name == "pod" || name == "pod_only") return Method::pod_only;
  if (name == "qm" || name == "pod_qm") return Method::pod_qm;
  if (name == "greedy" || name == "greedy_qm") return Method::greedy_qm;
  if (name == "riemannian" || name == "riemannian_qm" || name == "fastqm") return Method::riemannian_qm;
  throw InputError("unknown method '" + std::string(name) + "' (expected pod|qm|greedy|riemannian)");
}

void QuadraticManifoldModel::validate() const {
  const Eigen::Index N = V_r.rows();
  if (reference.size() != N) throw InputError("model: reference length does not match V_r rows");
  if (V_q.rows() != N) throw InputError("model: V_q rows do not match V_r rows");
  if (r() < 1) throw InputError("model: r must be >= 1");
  require_orthonormal(V_r, "V_r");
  require_orthonormal(V_q, "V_q");
  if (method == Method::pod_only) {
    if (q() != 0 || Xi.size() != 0) throw InputError("model: a POD model carries no quadratic part");
    return;
  }
  if (Xi.rows() != q() || Xi.cols() != quad_dim(r())) {
    throw InputError("model: Xi is " + std::to_string(Xi.rows()) + "x" + std::to_string(Xi.cols()) + ", expected " +
                     std::to_string(q()) + "x" + std::to_string(quad_dim(r())));
  }
  const double cross = (V_r.transpose() * V_q).norm();
  if (!(cross <= kOrthoTol * std::sqrt(static_cast<double>(r() * q())))) {
    throw InputError("model: V_r and V_q are not mutually orthogonal (||V_r^T V_q||_F = " + std::to_string(cross) + ")");
  }
}

Eigen::MatrixXd solve_xi(const Eigen::Ref<const Eigen::MatrixXd>& S_hat_q, const Eigen::Ref<const Eigen::MatrixXd>& W,
                         double gamma) {
  if (!(gamma >= 0)) throw InputError("solve_xi: gamma must be >= 0");
  if (S_hat_q.cols() != W.cols()) {
    throw InputError("solve_xi: data has " + std::to_string(S_hat_q.cols()) + " snapshots, features have " +
                     std::to_string(W.cols()));
  }
  const Eigen::Index P = W.rows();
  Eigen::MatrixXd M = W * W.transpose();
  M.diagonal().array() += gamma;
  const Eigen::MatrixXd rhs = W * S_hat_q.transpose();  // (S_hat_q W^T)^T

  Eigen::LLT<Eigen::MatrixXd> llt(M);
  const bool singular = llt.info() != Eigen::Success || !(llt.rcond() > 1e-14);
  if (singular) {
    if (gamma == 0.0) {
      throw NumericalError("solve_xi: W W^T (" + std::to_string(P) + "x" + std::to_string(P) +
                           ") is numerically singular; use a regularization gamma > 0");
    }
    throw NumericalError("solve_xi: Cholesky factorization of W W^T + gamma I failed");
  }
  Eigen::MatrixXd XiT = llt.solve(rhs);

  const double scale = rhs.norm();
  auto residual = [&] { return (M * XiT - rhs).norm(); };
  if (residual() > 1e-8 * scale) {
    XiT += llt.solve(rhs - M * XiT);
    const double res = residual();
    if (res > 1e-8 * scale) {
      throw NumericalError("solve_xi: normal-equation residual " + std::to_string(res) + " exceeds 1e-8 * " +
                           std::to_string(scale) + "; increase gamma");
    }
  }
  return XiT.transpose();
}

QuadraticManifoldModel fit_pod(const CandidateBasis& basis, Eigen::Index r) {
  if (r < 1 || r > basis.m()) {
    throw InputError("fit_pod: r must lie in 1..m = " + std::to_string(basis.m()) + ", got " + std::to_string(r));
  }
  QuadraticManifoldModel model;
  model.reference = basis.reference;
  model.V_r = basis.V_tilde.leftCols(r);
  model.V_q = Eigen::MatrixXd(basis.state_dim(), 0);
  model.method = Method::pod_only;
  model.factor = CandidateFactor{Eigen::MatrixXd::Identity(basis.m(), r), Eigen::MatrixXd(basis.m(), 0)};
  return model;
}

QuadraticManifoldModel fit_pod_qm(const CandidateBasis& basis, Eigen::Index r, Eigen::Index q, double gamma) {
  require_dims(basis, r, q, "fit_pod_qm");
  const Eigen::MatrixXd W = khatri_rao_square(basis.S_tilde.topRows(r));
  Eigen::MatrixXd Xi = solve_xi(basis.S_tilde.middleRows(r, q), W, gamma);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(basis.m(), r + q);
  return assemble(basis, I.leftCols(r), I.rightCols(q), std::move(Xi), gamma, Method::pod_qm);
}

FeatureObjective feature_objective(const StiefelPoint& point, const Eigen::Ref<const Eigen::MatrixXd>& S_tilde,
                                   double gamma) {
  if (S_tilde.rows() != point.ambient()) {
    throw InputError("feature_objective: S_tilde has " + std::to_string(S_tilde.rows()) + " rows, point has m = " +
                     std::to_string(point.ambient()));
  }
  const Eigen::Index r = point.r();
  const Eigen::MatrixXd A = point.Q_r().transpose() * S_tilde;  // r x K
  const Eigen::MatrixXd B = point.Q_q().transpose() * S_tilde;  // q x K
  const Eigen::MatrixXd W = khatri_rao_square(A);

  FeatureObjective out;
  out.Xi = solve_xi(B, W, gamma);
  const Eigen::MatrixXd XiW = out.Xi * W;
  out.cost = reduced_cost(A, B, XiW, out.Xi, gamma);

  // Xi is stationary for the inner problem, so only the explicit dependence on Q counts.
  const Eigen::MatrixXd grad_W = 2.0 * out.Xi.transpose() * (XiW - B);  // P x K
  Eigen::MatrixXd grad_A = -2.0 * A;
  Eigen::Index p = 0;
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = i; j < r; ++j, ++p) {
      if (i == j) {
        grad_A.row(i) += 2.0 * grad_W.row(p).cwiseProduct(A.row(i));
      } else {
        grad_A.row(i) += grad_W.row(p).cwiseProduct(A.row(j));
        grad_A.row(j) += grad_W.row(p).cwiseProduct(A.row(i));
      }
    }
  }
  out.euclid_grad.resize(point.ambient(), point.cols());
  out.euclid_grad.leftCols(r) = S_tilde * grad_A.transpose();
  out.euclid_grad.rightCols(point.q()) = -2.0 * S_tilde * XiW.transpose();
  return out;
}

FastQmResult fit_fastqm(const CandidateBasis& basis, Eigen::Index r, Eigen::Index q, double gamma,
                        const SolverConfig& cfg, const IterateObserver& observer) {
  require_dims(basis, r, q, "fit_fastqm");
  if (!(gamma >= 0)) throw InputError("fit_fastqm: gamma must be >= 0");
  cfg.validate();

  const double norm = basis.total_energy > 0 ? basis.total_energy : 1.0;
  const Eigen::MatrixXd& S_tilde = basis.S_tilde;
  CostAndGrad cost = [&](const StiefelPoint& X) {
    FeatureObjective obj = feature_objective(X, S_tilde, gamma);
    return std::pair<double, Eigen::MatrixXd>(obj.cost / norm, obj.euclid_grad / norm);
  };
  MinimizeResult result = minimize(cost, StiefelPoint::leading(basis.m(), r, q), cfg, observer);

  FeatureObjective final_obj = feature_objective(result.point, S_tilde, gamma);
  QuadraticManifoldModel model = assemble(basis, result.point.Q_r(), result.point.Q_q(), std::move(final_obj.Xi),
                                          gamma, Method::riemannian_qm);
  return {std::move(model), std::move(result.report)};
}

double greedy_step_objective(const CandidateBasis& basis, const std::vector<Eigen::Index>& linear, double gamma) {
  const Eigen::Index m = basis.m();
  std::vector<bool> in_linear(static_cast<std::size_t>(m), false);
  for (Eigen::Index j : linear) {
    if (j < 0 || j >= m) throw InputError("greedy_step_objective: candidate index out of range");
    if (in_linear[static_cast<std::size_t>(j)]) throw InputError("greedy_step_objective: duplicate candidate index");
    in_linear[static_cast<std::size_t>(j)] = true;
  }
  std::vector<Eigen::Index> pool;
  for (Eigen::Index j = 0; j < m; ++j) {
    if (!in_linear[static_cast<std::size_t>(j)]) pool.push_back(j);
  }
  const Eigen::MatrixXd A = take_rows(basis.S_tilde, linear);
  const Eigen::MatrixXd W = khatri_rao_square(A);
  if (pool.empty()) return basis.total_energy - A.squaredNorm();
  const Eigen::MatrixXd B = take_rows(basis.S_tilde, pool);
  const Eigen::MatrixXd Xi = solve_xi(B, W, gamma);
  return basis.total_energy + reduced_cost(A, B, Xi * W, Xi, gamma);
}

GreedyResult fit_greedy(const CandidateBasis& basis, Eigen::Index r, Eigen::Index q, double gamma) {
  require_dims(basis, r, q, "fit_greedy");
  const Eigen::Index m = basis.m();
  GreedyTrace trace;
  std::vector<bool> taken(static_cast<std::size_t>(m), false);

  for (Eigen::Index i = 0; i < r; ++i) {
    Eigen::Index best = -1;
    double best_value = 0.0;
    std::vector<Eigen::Index> trial = trace.selected_indices;
    trial.push_back(0);
    for (Eigen::Index j = 0; j < m; ++j) {
      if (taken[static_cast<std::size_t>(j)]) continue;
      trial.back() = j;
      double value;
      try {
        value = greedy_step_objective(basis, trial, gamma);
      } catch (const NumericalError&) {
        // Candidates that make the feature system singular cannot be selected.
        continue;
      }
      if (best < 0 || value < best_value) {
        best = j;
        best_value = value;
      }
    }
    if (best < 0) {
      throw NumericalError("fit_greedy: every candidate at step " + std::to_string(i + 1) +
                           " gives a singular coefficient system; use a regularization gamma > 0");
    }
    taken[static_cast<std::size_t>(best)] = true;
    trace.selected_indices.push_back(best);
    trace.objective_history.push_back(best_value);
  }

  std::vector<Eigen::Index> quad;
  for (Eigen::Index j = 0; j < m && static_cast<Eigen::Index>(quad.size()) < q; ++j) {
    if (!taken[static_cast<std::size_t>(j)]) quad.push_back(j);
  }
  const Eigen::MatrixXd W = khatri_rao_square(take_rows(basis.S_tilde, trace.selected_indices));
  Eigen::MatrixXd Xi = solve_xi(take_rows(basis.S_tilde, quad), W, gamma);
  QuadraticManifoldModel model =
      assemble(basis, selection(m, trace.selected_indices), selection(m, quad), std::move(Xi), gamma, Method::greedy_qm);
  return {std::move(model), std::move(trace)};
}

Eigen::VectorXd encode(const QuadraticManifoldModel& model, const Eigen::Ref<const Eigen::VectorXd>& s) {
  if (s.size() != model.state_dim()) {
    throw InputError("encode: state has length " + std::to_string(s.size()) + ", model expects " +
                     std::to_string(model.state_dim()));
  }
  return model.V_r.transpose() * (s - model.reference);
}

Eigen::VectorXd decode(const QuadraticManifoldModel& model, const Eigen::Ref<const Eigen::VectorXd>& s_hat) {
  if (s_hat.size() != model.r()) {
    throw InputError("decode: reduced state has length " + std::to_string(s_hat.size()) + ", model expects r = " +
                     std::to_string(model.r()));
  }
  Eigen::VectorXd s = model.reference + model.V_r * s_hat;
  if (model.method != Method::pod_only && model.q() > 0) s += model.V_q * (model.Xi * compressed_square(s_hat));
  return s;
}

Eigen::MatrixXd encode_centered(const QuadraticManifoldModel& model, const Eigen::Ref<const Eigen::MatrixXd>& S) {
  if (S.rows() != model.state_dim()) {
    throw InputError("encode: data has " + std::to_string(S.rows()) + " rows, model expects " +
                     std::to_string(model.state_dim()));
  }
  return model.V_r.transpose() * S;
}

Eigen::MatrixXd decode_centered(const QuadraticManifoldModel& model, const Eigen::Ref<const Eigen::MatrixXd>& S_hat) {
  if (S_hat.rows() != model.r()) {
    throw InputError("decode: reduced data has " + std::to_string(S_hat.rows()) + " rows, model expects r = " +
                     std::to_string(model.r()));
  }
  Eigen::MatrixXd S = model.V_r * S_hat;
  if (model.method != Method::pod_only && model.q() > 0) S += model.V_q * (model.Xi * khatri_rao_square(S_hat));
  return S;
}

double training_error(const QuadraticManifoldModel& model, const CandidateBasis& basis) {
  if (!model.factor) throw InputError("training_error: model has no candidate-basis factor");
  const CandidateFactor& f = *model.factor;
  if (f.Q_r.rows() != basis.m()) throw InputError("training_error: model factor does not match the basis");
  if (basis.total_energy == 0.0) return 0.0;
  const Eigen::MatrixXd A = f.Q_r.transpose() * basis.S_tilde;
  Eigen::MatrixXd approx = f.Q_r * A;
  if (model.method != Method::pod_only && model.q() > 0) approx += f.Q_q * (model.Xi * khatri_rao_square(A));
  // Energy outside the candidate span, from the spectrum tail when it is known.
  const double outside = basis.sigma.size() > basis.m()
                             ? basis.sigma.tail(basis.sigma.size() - basis.m()).squaredNorm()
                             : std::max(0.0, basis.total_energy - basis.S_tilde.squaredNorm());
  return std::sqrt((outside + (basis.S_tilde - approx).squaredNorm()) / basis.total_energy);
}

}  // namespace fastqm
