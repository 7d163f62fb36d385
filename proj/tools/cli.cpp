#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "fastqm/error.hpp"
#include "fastqm/eval.hpp"
#include "fastqm/io.hpp"
#include "fastqm/qmfit.hpp"
#include "fastqm/snapshots.hpp"
#include "fastqm/stiefel.hpp"
#include "fastqm/synth.hpp"

namespace fastqm::cli {

namespace {

constexpr const char* kVersion = "fastqm 0.1.0";

using Meta = std::vector<std::pair<std::string, std::string>>;

std::string join_args(const std::vector<std::string>& args) {
  std::string out;
  for (const auto& a : args) {
    if (!out.empty()) out += ' ';
    out += a;
  }
  return out;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> meta_comments(const Meta& meta) {
  std::vector<std::string> out;
  for (const auto& [k, v] : meta) out.push_back(k + "=" + v);
  return out;
}

void write_comments(std::ostream& os, const Meta& meta) {
  for (const auto& [k, v] : meta) os << "# " << k << '=' << v << '\n';
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  return os;
}

unsigned default_threads() {
  if (const char* env = std::getenv("FASTQM_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return 1;
}

struct SolverFlags {
  double grad_tol = 2e-4;
  int max_iters = 500;
  double initial_step = 1.0;
  double armijo = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 30;
  int cg_restart = 50;
  std::uint64_t seed = 0;

  void add_to(CLI::App* app) {
    app->add_option("--grad-tol", grad_tol, "Stop when the Riemannian gradient norm falls below this")
        ->capture_default_str();
    app->add_option("--max-iters", max_iters, "Iteration limit for the Riemannian solver")->capture_default_str();
    app->add_option("--initial-step", initial_step, "Line-search initial step")->capture_default_str();
    app->add_option("--armijo", armijo, "Armijo sufficient-decrease constant")->capture_default_str();
    app->add_option("--backtrack", backtrack, "Line-search backtracking factor")->capture_default_str();
    app->add_option("--max-backtracks", max_backtracks, "Backtracking steps before giving up")->capture_default_str();
    app->add_option("--cg-restart", cg_restart, "Restart conjugate directions every this many iterations")
        ->capture_default_str();
    app->add_option("--seed", seed, "Reserved for randomized restarts")->capture_default_str();
  }

  SolverConfig config() const {
    SolverConfig cfg;
    cfg.grad_tol = grad_tol;
    cfg.max_iters = max_iters;
    cfg.line_search = {initial_step, armijo, backtrack, max_backtracks};
    cfg.cg_restart_period = cg_restart;
    cfg.seed = seed;
    cfg.validate();
    return cfg;
  }

  void describe(Meta& meta) const {
    meta.emplace_back("grad_tol", format_number(grad_tol));
    meta.emplace_back("max_iters", std::to_string(max_iters));
  }
};

// ---- svd ------------------------------------------------------------------

struct SvdCmd {
  std::string input, output, reference, centering = "mean", route = "auto";
  Eigen::Index m = 0;
};

int run_svd(const SvdCmd& c, const Meta& prov, std::ostream& out) {
  if (c.m < 1) throw InputError("--m must be >= 1");
  const Centering mode = parse_centering(c.centering);
  SvdRoute route = SvdRoute::automatic;
  if (c.route == "direct") route = SvdRoute::direct;
  else if (c.route == "gram") route = SvdRoute::gram;
  else if (c.route != "auto") throw InputError("--route must be auto|direct|gram");
  if (mode == Centering::custom && c.reference.empty()) throw InputError("--centering custom requires --reference");

  const Eigen::MatrixXd raw = load_matrix(c.input);
  if (c.m > std::min(raw.rows(), raw.cols())) {
    throw InputError("--m = " + std::to_string(c.m) + " violates m <= min(N, K) = " +
                     std::to_string(std::min(raw.rows(), raw.cols())) + " for the " + std::to_string(raw.rows()) +
                     "x" + std::to_string(raw.cols()) + " snapshot matrix");
  }
  std::optional<Eigen::VectorXd> ref;
  if (mode == Centering::custom) {
    const Eigen::MatrixXd r = load_matrix(c.reference);
    if (r.cols() != 1) throw InputError("--reference must hold a single column");
    ref = r.col(0);
  }
  const SnapshotSet S = center(raw, mode, ref);
  const CandidateBasis basis = candidate_basis(S, c.m, route);

  Fqm1File file = basis_to_fqm1(basis);
  for (const auto& [k, v] : prov) file.set_meta(k, v);
  file.set_meta("centering", std::string(to_string(mode)));
  file.set_meta("input", c.input);
  write_fqm1(c.output, file);

  out << "basis: N=" << basis.state_dim() << " K=" << basis.num_snapshots() << " m=" << basis.m() << '\n';
  out << "sigma:";
  for (Eigen::Index i = 0; i < basis.m(); ++i) out << ' ' << format_number(basis.sigma(i));
  out << '\n';
  return kOk;
}

// ---- fit ------------------------------------------------------------------

struct FitCmd {
  std::string basis, method, output, report;
  Eigen::Index r = 0, q = 0;
  double gamma = 0.0;
  SolverFlags solver;
};

int run_fit(const FitCmd& c, const Meta& prov, std::ostream& out, std::ostream& err) {
  const Method method = parse_method(c.method);
  if (c.r < 1) throw InputError("--r must be >= 1");
  if (!(c.gamma >= 0)) throw InputError("--gamma must be >= 0");
  const SolverConfig cfg = c.solver.config();
  Eigen::Index q = c.q;
  if (method == Method::pod_only && q != 0) {
    err << "warning: --q " << q << " ignored for method pod (no quadratic part)\n";
    q = 0;
  }
  if (method != Method::pod_only && q < 1) throw InputError("--q must be >= 1 for quadratic methods");

  const CandidateBasis basis = basis_from_fqm1(read_fqm1(std::filesystem::path(c.basis)));
  if (method == Method::pod_only ? c.r > basis.m() : c.r + q > basis.m()) {
    throw InputError("r + q = " + std::to_string(c.r + q) + " exceeds the m = " + std::to_string(basis.m()) +
                     " candidate modes in '" + c.basis + "'");
  }

  Meta meta = prov;
  meta.emplace_back("method", std::string(to_string(method)));
  meta.emplace_back("r", std::to_string(c.r));
  meta.emplace_back("q", std::to_string(q));
  meta.emplace_back("m", std::to_string(basis.m()));
  meta.emplace_back("gamma", format_number(c.gamma));

  QuadraticManifoldModel model;
  std::ostringstream report;
  switch (method) {
    case Method::pod_only:
      model = fit_pod(basis, c.r);
      break;
    case Method::pod_qm:
      model = fit_pod_qm(basis, c.r, q, c.gamma);
      break;
    case Method::greedy_qm: {
      GreedyResult res = fit_greedy(basis, c.r, q, c.gamma);
      report << "iteration,selected_index,objective\n";
      for (std::size_t i = 0; i < res.trace.selected_indices.size(); ++i) {
        report << i + 1 << ',' << res.trace.selected_indices[i] << ',' << format_number(res.trace.objective_history[i])
               << '\n';
      }
      model = std::move(res.model);
      break;
    }
    case Method::riemannian_qm: {
      FastQmResult res;
      try {
        res = fit_fastqm(basis, c.r, q, c.gamma, cfg);
      } catch (const OptimizerError& e) {
        err << "optimizer failed after " << e.report().iterations << " iterations\n";
        throw;
      }
      c.solver.describe(meta);
      meta.emplace_back("iterations", std::to_string(res.report.iterations));
      meta.emplace_back("termination", std::string(to_string(res.report.termination)));
      meta.emplace_back("wall_time_s", format_number(res.report.wall_time));
      report << "iteration,cost,grad_norm\n";
      for (std::size_t i = 0; i < res.report.cost_history.size(); ++i) {
        report << i << ',' << format_number(res.report.cost_history[i]) << ','
               << format_number(res.report.grad_norm_history[i]) << '\n';
      }
      out << "iterations=" << res.report.iterations << " termination=" << to_string(res.report.termination) << '\n';
      model = std::move(res.model);
      break;
    }
  }
  if (method == Method::pod_only || method == Method::pod_qm) report << "iteration\n";

  const double train = training_error(model, basis);
  meta.emplace_back("training_relative_error", format_number(train));

  Fqm1File file = model_to_fqm1(model);
  for (const auto& [k, v] : meta) file.set_meta(k, v);
  file.set_meta("basis", c.basis);
  write_fqm1(c.output, file);

  const std::string report_path = c.report.empty() ? c.output + ".report.csv" : c.report;
  auto os = open_out(report_path);
  write_comments(os, meta);
  os << report.str();
  if (!os) throw IoError("failed writing '" + report_path + "'");

  out << "training_relative_error=" << format_number(train) << '\n';
  return kOk;
}

// ---- eval -----------------------------------------------------------------

struct EvalCmd {
  std::string model, test, report;
};

int run_eval(const EvalCmd& c, const Meta& prov, std::ostream& out) {
  const QuadraticManifoldModel model = model_from_fqm1(read_fqm1(std::filesystem::path(c.model)));
  const Eigen::MatrixXd raw = load_matrix(c.test);
  if (raw.rows() != model.state_dim()) {
    throw InputError("test data has " + std::to_string(raw.rows()) + " rows, model expects N = " +
                     std::to_string(model.state_dim()));
  }
  const SnapshotSet S = center_with(raw, model.reference);
  const ErrorReport rep = evaluate(model, S);

  auto os = open_out(c.report);
  Meta meta = prov;
  meta.emplace_back("model", c.model);
  meta.emplace_back("test", c.test);
  meta.emplace_back("method", std::string(to_string(model.method)));
  meta.emplace_back("r", std::to_string(model.r()));
  meta.emplace_back("q", std::to_string(model.q()));
  meta.emplace_back("gamma", format_number(model.gamma));
  meta.emplace_back("test_frobenius_norm", format_number(rep.test_norm));
  write_comments(os, meta);
  os << "row,relative_frobenius,l2_error,l2_error_normalized\n";
  os << "summary," << format_number(rep.relative_frobenius) << ",,\n";
  for (Eigen::Index k = 0; k < rep.per_snapshot_l2.size(); ++k) {
    os << k << ",," << format_number(rep.per_snapshot_l2(k)) << ',' << format_number(rep.per_snapshot_l2_normalized(k))
       << '\n';
  }
  if (!os) throw IoError("failed writing '" + c.report + "'");
  out << "relative_error=" << format_number(rep.relative_frobenius) << '\n';
  return kOk;
}

// ---- sweep ----------------------------------------------------------------

struct SweepCmd {
  std::string train, test, output, detail, centering = "mean";
  std::vector<std::string> methods{"pod", "qm", "greedy", "riemannian"};
  std::vector<Eigen::Index> r_values, q_values{0}, m_values;
  std::vector<double> gamma_values{0.0};
  unsigned threads = default_threads();
  SolverFlags solver;
};

int run_sweep(const SweepCmd& c, const Meta& prov, std::ostream& out) {
  SweepGrid grid{c.r_values, c.q_values, c.m_values, c.gamma_values};
  SweepOptions opts;
  opts.methods.clear();
  for (const auto& name : c.methods) opts.methods.push_back(parse_method(name));
  opts.solver = c.solver.config();
  opts.threads = std::max(1u, c.threads);
  for (auto v : grid.r_values) {
    if (v < 1) throw InputError("--r values must be >= 1");
  }
  for (auto v : grid.q_values) {
    if (v < 0) throw InputError("--q values must be >= 0");
  }
  for (auto v : grid.m_values) {
    if (v < 1) throw InputError("--m values must be >= 1");
  }
  for (auto v : grid.gamma_values) {
    if (!(v >= 0)) throw InputError("--gamma values must be >= 0");
  }
  const Centering mode = parse_centering(c.centering);
  if (mode == Centering::custom) throw InputError("sweep supports zero|mean|initial centering");

  const Eigen::MatrixXd raw_train = load_matrix(c.train);
  const SnapshotSet train = center(raw_train, mode);
  const SnapshotSet test = c.test.empty() ? train : center_with(load_matrix(c.test), train.reference);
  if (test.state_dim() != train.state_dim()) throw InputError("train and test data have different state dimensions");

  const Eigen::Index m_max = std::min<Eigen::Index>(*std::max_element(grid.m_values.begin(), grid.m_values.end()),
                                                    std::min(train.state_dim(), train.num_snapshots()));
  const CandidateBasis basis = candidate_basis(train, m_max);
  const auto rows = sweep(basis, train, test, grid, opts);

  Meta meta = prov;
  meta.emplace_back("train", c.train);
  meta.emplace_back("test", c.test.empty() ? c.train : c.test);
  meta.emplace_back("centering", std::string(to_string(mode)));
  meta.emplace_back("errors", "relative Frobenius error on the test set; empty cells are infeasible or failed");
  c.solver.describe(meta);
  {
    auto os = open_out(c.output);
    write_comments(os, meta);
    write_sweep_csv(os, rows, grid);
    if (!os) throw IoError("failed writing '" + c.output + "'");
  }
  const std::string detail = c.detail.empty() ? c.output + ".detail.csv" : c.detail;
  {
    auto os = open_out(detail);
    write_comments(os, meta);
    write_sweep_detail_csv(os, rows);
    if (!os) throw IoError("failed writing '" + detail + "'");
  }
  std::size_t infeasible = 0, failed = 0;
  for (const auto& row : rows) {
    infeasible += row.status == PointStatus::infeasible;
    failed += row.status == PointStatus::failed;
  }
  out << "points=" << rows.size() << " infeasible=" << infeasible << " failed=" << failed << '\n';
  return kOk;
}

// ---- synth ----------------------------------------------------------------

struct SynthCmd {
  std::string kind = "parabola", output;
  Eigen::Index samples = 25, n = 50, r_true = 2;
  std::uint64_t seed = 0;
  double quadratic_scale = 1.0;
};

int run_synth(const SynthCmd& c, const Meta& prov, std::ostream& out) {
  Meta meta = prov;
  meta.emplace_back("kind", c.kind);
  meta.emplace_back("samples", std::to_string(c.samples));
  Eigen::MatrixXd raw;
  if (c.kind == "parabola") {
    raw = gen_parabola(c.samples).raw();
  } else if (c.kind == "poly") {
    meta.emplace_back("N", std::to_string(c.n));
    meta.emplace_back("r_true", std::to_string(c.r_true));
    meta.emplace_back("seed", std::to_string(c.seed));
    meta.emplace_back("quadratic_scale", format_number(c.quadratic_scale));
    raw = gen_poly_manifold(c.n, c.r_true, c.samples, c.seed, c.quadratic_scale).snapshots.raw();
  } else {
    throw InputError("--kind must be parabola|poly");
  }
  save_matrix(c.output, raw, meta);
  out << "wrote " << raw.rows() << "x" << raw.cols() << " snapshots to " << c.output << '\n';
  return kOk;
}

// ---- rotation-sweep -------------------------------------------------------

struct RotationCmd {
  std::string input, output, centering = "zero";
  Eigen::Index samples = 25;
  double step = 0.01;
  double gamma = 0.0;
};

int run_rotation(const RotationCmd& c, const Meta& prov, std::ostream& out) {
  if (!(c.step > 0)) throw InputError("--step must be > 0");
  if (!(c.gamma >= 0)) throw InputError("--gamma must be >= 0");
  const SnapshotSet S = c.input.empty() ? gen_parabola(c.samples) : center(load_matrix(c.input), parse_centering(c.centering));
  const auto samples = rotation_sweep(S, angle_grid(c.step), c.gamma);

  Meta meta = prov;
  meta.emplace_back("input", c.input.empty() ? "parabola(" + std::to_string(c.samples) + ")" : c.input);
  meta.emplace_back("gamma", format_number(c.gamma));
  meta.emplace_back("step", format_number(c.step));
  auto os = open_out(c.output);
  write_comments(os, meta);
  os << "theta,relative_error\n";
  std::size_t best = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    os << format_number(samples[i].theta) << ',' << format_number(samples[i].relative_error) << '\n';
    if (samples[i].relative_error < samples[best].relative_error) best = i;
  }
  if (!os) throw IoError("failed writing '" + c.output + "'");
  out << "argmin_theta=" << format_number(samples[best].theta)
      << " min_relative_error=" << format_number(samples[best].relative_error) << '\n';
  return kOk;
}

// ---- config injection -----------------------------------------------------

std::string normalize_key(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

bool user_supplied(const std::vector<std::string>& args, const std::string& flag) {
  for (const auto& a : args) {
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  }
  return false;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config file '" + path + "'");
  std::vector<std::pair<std::string, std::string>> out;
  std::size_t lineno = 0;
  for (std::string line; std::getline(is, line);) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InputError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

int run(const std::vector<std::string>& args_in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quadratic-manifold learning: POD, POD-based, greedy and Riemannian (FastQM) quadratic manifolds"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  SvdCmd svd;
  FitCmd fit;
  EvalCmd ev;
  SweepCmd sw;
  SynthCmd syn;
  RotationCmd rot;
  std::string config_path;
  app.add_option("--config", config_path, "Flat key=value file of defaults; command-line flags win");

  auto* s_svd = app.add_subcommand("svd", "Centre snapshots and write the candidate basis");
  s_svd->add_option("--input", svd.input, "Snapshot matrix (CSV or FQM1), one column per snapshot")->required();
  s_svd->add_option("--m", svd.m, "Number of candidate modes")->required();
  s_svd->add_option("--output", svd.output, "Basis file (FQM1)")->required();
  s_svd->add_option("--centering", svd.centering, "zero|mean|initial|custom")->capture_default_str();
  s_svd->add_option("--reference", svd.reference, "Reference vector file for --centering custom");
  s_svd->add_option("--route", svd.route, "SVD algorithm: auto|direct|gram")->capture_default_str();

  auto* s_fit = app.add_subcommand("fit", "Fit a POD or quadratic-manifold model on a basis file");
  s_fit->add_option("--basis", fit.basis, "Basis file written by 'svd'")->required();
  s_fit->add_option("--method", fit.method, "pod|qm|greedy|riemannian")->required();
  s_fit->add_option("--r", fit.r, "Reduced (linear) dimension")->required();
  s_fit->add_option("--q", fit.q, "Quadratic dimension")->capture_default_str();
  s_fit->add_option("--gamma", fit.gamma, "Regularization of the coefficient matrix")->capture_default_str();
  s_fit->add_option("--output", fit.output, "Model file (FQM1)")->required();
  s_fit->add_option("--report", fit.report, "Fit report CSV (default: <output>.report.csv)");
  fit.solver.add_to(s_fit);

  auto* s_eval = app.add_subcommand("eval", "Relative reconstruction error of a model on test snapshots");
  s_eval->add_option("--model", ev.model, "Model file written by 'fit'")->required();
  s_eval->add_option("--test", ev.test, "Raw test snapshots (CSV or FQM1); centered by the model reference")->required();
  s_eval->add_option("--report", ev.report, "Error report CSV")->required();

  auto* s_sweep = app.add_subcommand("sweep", "Parameter sweep over r, q, m and gamma");
  s_sweep->add_option("--train", sw.train, "Raw training snapshots")->required();
  s_sweep->add_option("--test", sw.test, "Raw test snapshots (default: the training set)");
  s_sweep->add_option("--centering", sw.centering, "zero|mean|initial")->capture_default_str();
  s_sweep->add_option("--methods", sw.methods, "Comma-separated subset of pod,qm,greedy,riemannian")
      ->delimiter(',')
      ->capture_default_str();
  s_sweep->add_option("--r", sw.r_values, "Comma-separated r values")->delimiter(',')->required();
  s_sweep->add_option("--q", sw.q_values, "Comma-separated q values")->delimiter(',')->capture_default_str();
  s_sweep->add_option("--m", sw.m_values, "Comma-separated m values")->delimiter(',')->required();
  s_sweep->add_option("--gamma", sw.gamma_values, "Comma-separated gamma values")->delimiter(',')->capture_default_str();
  s_sweep->add_option("--threads", sw.threads, "Worker threads (default from FASTQM_THREADS)")->capture_default_str();
  s_sweep->add_option("--output", sw.output, "Figure-style CSV")->required();
  s_sweep->add_option("--detail", sw.detail, "Long-format CSV (default: <output>.detail.csv)");
  sw.solver.add_to(s_sweep);

  auto* s_synth = app.add_subcommand("synth", "Write a synthetic snapshot set");
  s_synth->add_option("--kind", syn.kind, "parabola|poly")->capture_default_str();
  s_synth->add_option("--samples", syn.samples, "Number of snapshots")->capture_default_str();
  s_synth->add_option("--n", syn.n, "State dimension (poly)")->capture_default_str();
  s_synth->add_option("--r-true", syn.r_true, "Intrinsic dimension (poly)")->capture_default_str();
  s_synth->add_option("--seed", syn.seed, "Random seed (poly)")->capture_default_str();
  s_synth->add_option("--quadratic-scale", syn.quadratic_scale, "Scale of the quadratic part (poly)")
      ->capture_default_str();
  s_synth->add_option("--output", syn.output, "Output file (.csv or .fqm)")->required();

  auto* s_rot = app.add_subcommand("rotation-sweep", "Error of the rotated two-mode quadratic manifold versus angle");
  s_rot->add_option("--input", rot.input, "Two-row snapshot matrix (default: the built-in parabola)");
  s_rot->add_option("--samples", rot.samples, "Parabola samples when no input is given")->capture_default_str();
  s_rot->add_option("--centering", rot.centering, "Centering of --input data")->capture_default_str();
  s_rot->add_option("--step", rot.step, "Angle grid spacing over [0, 2 pi)")->capture_default_str();
  s_rot->add_option("--gamma", rot.gamma, "Regularization")->capture_default_str();
  s_rot->add_option("--output", rot.output, "CSV with columns theta,relative_error")->required();

  // Pull --config out and splice its values in front of the user's own flags.
  std::vector<std::string> args;
  std::string config_file;
  for (std::size_t i = 0; i < args_in.size(); ++i) {
    const std::string& a = args_in[i];
    if (a == "--config" && i + 1 < args_in.size()) {
      config_file = args_in[++i];
    } else if (a.rfind("--config=", 0) == 0) {
      config_file = a.substr(9);
    } else {
      args.push_back(a);
    }
  }

  try {
    if (!config_file.empty()) {
      const auto pairs = read_config_file(config_file);
      auto sub_pos = std::find_if(args.begin() + (args.empty() ? 0 : 1), args.end(),
                                  [](const std::string& a) { return !a.empty() && a[0] != '-'; });
      if (sub_pos != args.end()) {
        CLI::App* sub = app.get_subcommand_no_throw(*sub_pos);
        if (sub != nullptr) {
          std::vector<std::string> injected;
          for (const auto& [key, value] : pairs) {
            const std::string flag = "--" + normalize_key(key);
            if (sub->get_option_no_throw(flag) != nullptr && !user_supplied(args, flag)) {
              injected.push_back(flag + "=" + value);
            }
          }
          args.insert(sub_pos + 1, injected.begin(), injected.end());
        }
      }
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return dynamic_cast<const IoError*>(&e) ? kIo : kUsage;
  }

  std::vector<char*> argv;
  std::vector<std::string> storage = args.empty() ? std::vector<std::string>{"fastqm"} : args;
  for (auto& a : storage) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::CallForVersion& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  Meta prov{{"generator", kVersion}, {"command", join_args(args_in)}};
  try {
    if (s_svd->parsed()) return run_svd(svd, prov, out);
    if (s_fit->parsed()) return run_fit(fit, prov, out, err);
    if (s_eval->parsed()) return run_eval(ev, prov, out);
    if (s_sweep->parsed()) return run_sweep(sw, prov, out);
    if (s_synth->parsed()) return run_synth(syn, prov, out);
    if (s_rot->parsed()) return run_rotation(rot, prov, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumerical;
  }
  return kUsage;
}

}  // namespace fastqm::cli
