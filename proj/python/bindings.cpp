#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "fastqm/error.hpp"
#include "fastqm/eval.hpp"
#include "fastqm/io.hpp"
#include "fastqm/qmfit.hpp"
#include "fastqm/snapshots.hpp"
#include "fastqm/stiefel.hpp"
#include "fastqm/synth.hpp"
#include "fastqm/tensorops.hpp"

namespace py = pybind11;
using namespace fastqm;

namespace {

SnapshotSet as_set(const Eigen::MatrixXd& data, const std::optional<Eigen::VectorXd>& reference) {
  SnapshotSet S;
  S.data = data;
  S.reference = reference ? *reference : Eigen::VectorXd::Zero(data.rows());
  S.centering = reference ? Centering::custom : Centering::zero;
  return S;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Quadratic-manifold learning core";

  auto base = py::register_exception<Error>(m, "FastQmError", PyExc_RuntimeError);
  py::register_exception<InputError>(m, "InputError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

  py::enum_<Centering>(m, "Centering")
      .value("zero", Centering::zero)
      .value("mean", Centering::mean)
      .value("initial", Centering::initial)
      .value("custom", Centering::custom);

  py::enum_<Method>(m, "Method")
      .value("pod_only", Method::pod_only)
      .value("pod_qm", Method::pod_qm)
      .value("greedy_qm", Method::greedy_qm)
      .value("riemannian_qm", Method::riemannian_qm);

  py::class_<SnapshotSet>(m, "SnapshotSet")
      .def_readonly("data", &SnapshotSet::data)
      .def_readonly("reference", &SnapshotSet::reference)
      .def_readonly("centering", &SnapshotSet::centering)
      .def("raw", &SnapshotSet::raw);

  py::class_<CandidateBasis>(m, "CandidateBasis")
      .def_readonly("reference", &CandidateBasis::reference)
      .def_readonly("V_tilde", &CandidateBasis::V_tilde)
      .def_readonly("sigma", &CandidateBasis::sigma)
      .def_readonly("S_tilde", &CandidateBasis::S_tilde)
      .def_readonly("total_energy", &CandidateBasis::total_energy)
      .def_property_readonly("m", &CandidateBasis::m);

  py::class_<QuadraticManifoldModel>(m, "QuadraticManifoldModel")
      .def_readonly("reference", &QuadraticManifoldModel::reference)
      .def_readonly("V_r", &QuadraticManifoldModel::V_r)
      .def_readonly("V_q", &QuadraticManifoldModel::V_q)
      .def_readonly("Xi", &QuadraticManifoldModel::Xi)
      .def_readonly("gamma", &QuadraticManifoldModel::gamma)
      .def_readonly("method", &QuadraticManifoldModel::method)
      .def_property_readonly("r", &QuadraticManifoldModel::r)
      .def_property_readonly("q", &QuadraticManifoldModel::q)
      .def("save", [](const QuadraticManifoldModel& model, const std::filesystem::path& path) {
        write_fqm1(path, model_to_fqm1(model));
      })
      .def_static("load", [](const std::filesystem::path& path) { return model_from_fqm1(read_fqm1(path)); });

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init([](double grad_tol, int max_iters, double initial_step, double armijo, double backtrack,
                       int max_backtracks, int cg_restart_period) {
             SolverConfig cfg;
             cfg.grad_tol = grad_tol;
             cfg.max_iters = max_iters;
             cfg.line_search = {initial_step, armijo, backtrack, max_backtracks};
             cfg.cg_restart_period = cg_restart_period;
             cfg.validate();
             return cfg;
           }),
           py::arg("grad_tol") = 2e-4, py::arg("max_iters") = 500, py::arg("initial_step") = 1.0,
           py::arg("armijo") = 1e-4, py::arg("backtrack") = 0.5, py::arg("max_backtracks") = 30,
           py::arg("cg_restart_period") = 50)
      .def_readwrite("grad_tol", &SolverConfig::grad_tol)
      .def_readwrite("max_iters", &SolverConfig::max_iters);

  py::class_<FitReport>(m, "FitReport")
      .def_readonly("iterations", &FitReport::iterations)
      .def_readonly("cost_history", &FitReport::cost_history)
      .def_readonly("grad_norm_history", &FitReport::grad_norm_history)
      .def_readonly("wall_time", &FitReport::wall_time)
      .def_property_readonly("termination", [](const FitReport& r) { return std::string(to_string(r.termination)); });

  m.def(
      "center",
      [](const Eigen::MatrixXd& raw, const std::string& mode, std::optional<Eigen::VectorXd> reference) {
        return center(raw, parse_centering(mode), reference);
      },
      py::arg("raw"), py::arg("mode") = "mean", py::arg("reference") = py::none());

  m.def(
      "candidate_basis",
      [](const Eigen::MatrixXd& data, Eigen::Index mm, std::optional<Eigen::VectorXd> reference) {
        return candidate_basis(as_set(data, reference), mm);
      },
      py::arg("data"), py::arg("m"), py::arg("reference") = py::none(),
      "Candidate basis of already-centered snapshots (columns).");
  m.def("pod_projection_error", &pod_projection_error, py::arg("basis"), py::arg("r"));

  m.def("fit_pod", &fit_pod, py::arg("basis"), py::arg("r"));
  m.def("fit_pod_qm", &fit_pod_qm, py::arg("basis"), py::arg("r"), py::arg("q"), py::arg("gamma") = 0.0);
  m.def(
      "fit_greedy",
      [](const CandidateBasis& b, Eigen::Index r, Eigen::Index q, double gamma) {
        GreedyResult res = fit_greedy(b, r, q, gamma);
        return py::make_tuple(res.model, res.trace.selected_indices, res.trace.objective_history);
      },
      py::arg("basis"), py::arg("r"), py::arg("q"), py::arg("gamma") = 0.0,
      "Returns (model, selected_indices, objective_history).");
  m.def(
      "fit_fastqm",
      [](const CandidateBasis& b, Eigen::Index r, Eigen::Index q, double gamma, const SolverConfig& cfg) {
        FastQmResult res;
        {
          py::gil_scoped_release release;
          res = fit_fastqm(b, r, q, gamma, cfg);
        }
        return py::make_tuple(res.model, res.report);
      },
      py::arg("basis"), py::arg("r"), py::arg("q"), py::arg("gamma") = 0.0, py::arg("config") = SolverConfig{},
      "Returns (model, report).");
  m.def(
      "feature_objective",
      [](const Eigen::MatrixXd& Q, Eigen::Index r, const Eigen::MatrixXd& S_tilde, double gamma) {
        const FeatureObjective obj = feature_objective(StiefelPoint(Q, r, Q.cols() - r), S_tilde, gamma);
        return py::make_tuple(obj.cost, obj.euclid_grad, obj.Xi);
      },
      py::arg("Q"), py::arg("r"), py::arg("S_tilde"), py::arg("gamma") = 0.0, "Returns (cost, gradient, Xi).");
  m.def(
      "solve_xi",
      [](const Eigen::MatrixXd& B, const Eigen::MatrixXd& W, double gamma) { return solve_xi(B, W, gamma); },
      py::arg("S_hat_q"), py::arg("W"), py::arg("gamma") = 0.0);
  m.def("training_error", &training_error, py::arg("model"), py::arg("basis"));

  m.def(
      "encode", [](const QuadraticManifoldModel& model, const Eigen::VectorXd& s) { return encode(model, s); },
      py::arg("model"), py::arg("s"));
  m.def(
      "decode", [](const QuadraticManifoldModel& model, const Eigen::VectorXd& s_hat) { return decode(model, s_hat); },
      py::arg("model"), py::arg("s_hat"));
  m.def(
      "reconstruct",
      [](const QuadraticManifoldModel& model, const Eigen::MatrixXd& raw) {
        return reconstruct_set(model, center_with(raw, model.reference));
      },
      py::arg("model"), py::arg("raw"), "Encode and decode raw snapshots (columns).");
  m.def(
      "relative_error",
      [](const Eigen::MatrixXd& S, const Eigen::MatrixXd& A) { return relative_error(S, A); }, py::arg("S_test"),
      py::arg("S_approx"));

  m.def(
      "compressed_square", [](const Eigen::VectorXd& x) { return compressed_square(x); }, py::arg("x"));
  m.def(
      "khatri_rao_square", [](const Eigen::MatrixXd& X) { return khatri_rao_square(X); }, py::arg("X"));

  m.def(
      "gen_parabola", [](Eigen::Index samples) { return gen_parabola(samples).raw(); }, py::arg("samples") = 25);
  m.def(
      "gen_poly_manifold",
      [](Eigen::Index N, Eigen::Index r_true, Eigen::Index samples, std::uint64_t seed, double scale) {
        return gen_poly_manifold(N, r_true, samples, seed, scale).snapshots.raw();
      },
      py::arg("N"), py::arg("r_true"), py::arg("samples"), py::arg("seed") = 0, py::arg("quadratic_scale") = 1.0);
  m.def(
      "rotation_sweep",
      [](const Eigen::MatrixXd& data, double step, double gamma) {
        const auto samples = rotation_sweep(as_set(data, std::nullopt), angle_grid(step), gamma);
        Eigen::MatrixXd out(static_cast<Eigen::Index>(samples.size()), 2);
        for (std::size_t i = 0; i < samples.size(); ++i) {
          out(static_cast<Eigen::Index>(i), 0) = samples[i].theta;
          out(static_cast<Eigen::Index>(i), 1) = samples[i].relative_error;
        }
        return out;
      },
      py::arg("data"), py::arg("step") = 0.01, py::arg("gamma") = 0.0,
      "Rows of (theta, relative_error) for centered two-dimensional snapshots.");

  m.def(
      "load_matrix", [](const std::filesystem::path& p) { return load_matrix(p); }, py::arg("path"));
  m.def(
      "save_matrix", [](const std::filesystem::path& p, const Eigen::MatrixXd& M) { save_matrix(p, M); },
      py::arg("path"), py::arg("matrix"));
}
