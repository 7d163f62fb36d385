#include "fastqm/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <thread>

#include "fastqm/error.hpp"

namespace fastqm {

namespace {

Eigen::MatrixXd centered_by_model(const QuadraticManifoldModel& model, const SnapshotSet& S) {
  if (S.state_dim() != model.state_dim()) {
    throw InputError("test data has state dimension " + std::to_string(S.state_dim()) + ", model expects " +
                     std::to_string(model.state_dim()));
  }
  if (S.reference.size() == model.reference.size() && S.reference == model.reference) return S.data;
  return S.data.colwise() + (S.reference - model.reference);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Eigen::MatrixXd reconstruct_set(const QuadraticManifoldModel& model, const SnapshotSet& S_test) {
  const Eigen::MatrixXd centered = centered_by_model(model, S_test);
  Eigen::MatrixXd out = decode_centered(model, encode_centered(model, centered));
  out.colwise() += model.reference;
  return out;
}

double relative_error(const Eigen::Ref<const Eigen::MatrixXd>& S_test, const Eigen::Ref<const Eigen::MatrixXd>& S_approx) {
  if (S_test.rows() != S_approx.rows() || S_test.cols() != S_approx.cols()) {
    throw InputError("relative_error: shapes differ (" + std::to_string(S_test.rows()) + "x" +
                     std::to_string(S_test.cols()) + " vs " + std::to_string(S_approx.rows()) + "x" +
                     std::to_string(S_approx.cols()) + ")");
  }
  const double denom = S_test.norm();
  if (!(denom > 0)) throw InputError("relative_error: test data has zero Frobenius norm");
  return (S_test - S_approx).norm() / denom;
}

ErrorReport evaluate(const QuadraticManifoldModel& model, const SnapshotSet& S_test, Eigen::Index m) {
  const Eigen::MatrixXd centered = centered_by_model(model, S_test);
  const Eigen::MatrixXd approx = decode_centered(model, encode_centered(model, centered));
  ErrorReport rep;
  rep.relative_frobenius = relative_error(centered, approx);
  const Eigen::MatrixXd diff = centered - approx;
  rep.per_snapshot_l2 = diff.colwise().norm().transpose();
  const Eigen::VectorXd col_norm = centered.colwise().norm().transpose();
  rep.per_snapshot_l2_normalized.resize(col_norm.size());
  for (Eigen::Index k = 0; k < col_norm.size(); ++k) {
    const double e = rep.per_snapshot_l2(k);
    rep.per_snapshot_l2_normalized(k) =
        col_norm(k) > 0 ? e / col_norm(k) : (e == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
  }
  rep.test_norm = centered.norm();
  rep.method = model.method;
  rep.params = {model.r(), model.q(), m, model.gamma};
  return rep;
}

std::string_view to_string(PointStatus s) {
  switch (s) {
    case PointStatus::ok: return "ok";
    case PointStatus::infeasible: return "infeasible";
    case PointStatus::failed: return "failed";
  }
  return "ok";
}

const MethodOutcome* SweepRow::find(Method method) const {
  for (const auto& o : outcomes) {
    if (o.method == method) return &o;
  }
  return nullptr;
}

namespace {

MethodOutcome run_point(const CandidateBasis& full, const SnapshotSet& train, const SnapshotSet& test,
                        const FitParams& p, Method method, const SolverConfig& solver) {
  MethodOutcome out;
  out.method = method;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out.train_error = nan;
  out.test_error = nan;

  const bool linear = method == Method::pod_only;
  const bool feasible = linear ? (p.r >= 1 && p.r <= p.m) : (p.r >= 1 && p.q >= 1 && p.r + p.q <= p.m);
  if (!feasible) {
    out.status = PointStatus::infeasible;
    out.message = linear ? "r > m" : "needs q >= 1 and r + q <= m";
    return out;
  }
  if (p.m > full.m()) {
    out.status = PointStatus::failed;
    out.message = "m exceeds the modes available in the basis";
    return out;
  }
  try {
    const CandidateBasis basis = truncate(full, p.m);
    QuadraticManifoldModel model;
    switch (method) {
      case Method::pod_only: model = fit_pod(basis, p.r); break;
      case Method::pod_qm: model = fit_pod_qm(basis, p.r, p.q, p.gamma); break;
      case Method::greedy_qm: model = fit_greedy(basis, p.r, p.q, p.gamma).model; break;
      case Method::riemannian_qm: {
        FastQmResult res = fit_fastqm(basis, p.r, p.q, p.gamma, solver);
        out.iterations = res.report.iterations;
        model = std::move(res.model);
        break;
      }
    }
    out.train_error = evaluate(model, train, p.m).relative_frobenius;
    out.test_error = evaluate(model, test, p.m).relative_frobenius;
  } catch (const Error& e) {
    out.status = PointStatus::failed;
    out.message = e.what();
  }
  return out;
}

}  // namespace

std::vector<SweepRow> sweep(const CandidateBasis& basis, const SnapshotSet& train, const SnapshotSet& test,
                            const SweepGrid& grid, const SweepOptions& options) {
  if (grid.r_values.empty() || grid.q_values.empty() || grid.m_values.empty() || grid.gamma_values.empty()) {
    throw InputError("sweep: every grid axis needs at least one value");
  }
  if (options.methods.empty()) throw InputError("sweep: no methods requested");
  for (double g : grid.gamma_values) {
    if (!(g >= 0)) throw InputError("sweep: gamma values must be >= 0");
  }
  options.solver.validate();

  std::vector<SweepRow> rows;
  for (double gamma : grid.gamma_values) {
    for (Eigen::Index m : grid.m_values) {
      for (Eigen::Index q : grid.q_values) {
        for (Eigen::Index r : grid.r_values) {
          SweepRow row;
          row.params = {r, q, m, gamma};
          rows.push_back(std::move(row));
        }
      }
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      SweepRow& row = rows[i];
      for (Method method : options.methods) {
        row.outcomes.push_back(run_point(basis, train, test, row.params, method, options.solver));
        const PointStatus s = row.outcomes.back().status;
        if (s == PointStatus::infeasible || (s == PointStatus::failed && row.status == PointStatus::ok)) row.status = s;
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(rows.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return rows;
}

std::vector<std::string> swept_axes(const SweepGrid& grid) {
  std::vector<std::string> axes;
  if (grid.r_values.size() > 1) axes.emplace_back("r");
  if (grid.q_values.size() > 1) axes.emplace_back("q");
  if (grid.m_values.size() > 1) axes.emplace_back("m");
  if (grid.gamma_values.size() > 1) axes.emplace_back("gamma");
  if (axes.empty()) axes.emplace_back("r");
  return axes;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows, const SweepGrid& grid) {
  const auto axes = swept_axes(grid);
  for (const auto& a : axes) os << a << ',';
  os << "error_pod,error_qm,error_greedy,error_riemannian,status\n";
  const Method order[] = {Method::pod_only, Method::pod_qm, Method::greedy_qm, Method::riemannian_qm};
  for (const auto& row : rows) {
    for (const auto& a : axes) {
      if (a == "r") os << row.params.r;
      else if (a == "q") os << row.params.q;
      else if (a == "m") os << row.params.m;
      else os << format_double(row.params.gamma);
      os << ',';
    }
    for (Method method : order) {
      const MethodOutcome* o = row.find(method);
      if (o && o->status == PointStatus::ok) os << format_double(o->test_error);
      os << ',';
    }
    os << to_string(row.status) << '\n';
  }
}

void write_sweep_detail_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "r,q,m,gamma,method,status,train_error,test_error,iterations,message\n";
  for (const auto& row : rows) {
    for (const auto& o : row.outcomes) {
      std::string msg = o.message;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      os << row.params.r << ',' << row.params.q << ',' << row.params.m << ',' << format_double(row.params.gamma) << ','
         << to_string(o.method) << ',' << to_string(o.status) << ',' << format_double(o.train_error) << ','
         << format_double(o.test_error) << ',' << o.iterations << ',' << msg << '\n';
    }
  }
}

}  // namespace fastqm
