#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "phasels/cli.hpp"
#include "phasels/errors.hpp"
#include "phasels/geometry.hpp"
#include "phasels/harness.hpp"
#include "phasels/run_config.hpp"
#include "phasels/signals.hpp"
#include "phasels/solvers.hpp"

namespace py = pybind11;
using namespace phasels;

namespace {

MeasurementSet Wrap(const Matrix& a) { return MeasurementSet{a, 0}; }

Loss ParseLoss(const std::string& name) {
  if (name == "amplitude") return Loss::kAmplitude;
  if (name == "linear") return Loss::kLinear;
  throw py::value_error("loss must be 'amplitude' or 'linear'");
}

SolverConfig MakeConfig(int max_iters, double tol, std::optional<double> step, int restarts,
                        std::optional<Vector> init, std::uint64_t seed, int spectral_support) {
  SolverConfig c;
  c.max_iters = max_iters;
  c.tol = tol;
  c.step = step;
  c.restarts = restarts;
  c.seed = seed;
  c.spectral_support = spectral_support;
  if (init) c.init = SolverInit::Given(*init);
  return c;
}

#define PHASELS_SOLVER_ARGS                                                            \
  py::arg("max_iters") = 1000, py::arg("tol") = 1e-10, py::arg("step") = py::none(),   \
      py::arg("restarts") = 1, py::arg("init") = py::none(), py::arg("seed") = 0,      \
      py::arg("spectral_support") = 0

}  // namespace

PYBIND11_MODULE(_phasels, m) {
  m.doc() = "Phase retrieval by nonlinear least squares";

  static py::exception<Error> error(m, "PhaselsError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, (std::string(ErrorCodeName(e.code())) + ": " + e.what()).c_str());
    }
  });

  // signals
  m.def("gen_gaussian_matrix",
        [](int rows, int d, std::uint64_t seed) { return GenGaussianMatrix(rows, d, seed).entries; },
        py::arg("m"), py::arg("d"), py::arg("seed"));
  m.def("gen_signal",
        [](int d, std::optional<int> s, double norm, std::uint64_t seed) {
          return GenSignal(d, s, norm, seed).values;
        },
        py::arg("d"), py::arg("s") = py::none(), py::arg("norm") = 1.0, py::arg("seed") = 0);
  m.def("gen_noise",
        [](const std::string& spec, int rows, std::uint64_t seed) {
          return GenNoise(ParseNoiseSpec(spec), rows, seed);
        },
        py::arg("spec"), py::arg("m"), py::arg("seed"),
        "Noise vector for a spec such as 'zero', 'iid_gaussian:0.1', 'fixed_norm:1', 'constant:1'.");

  // geometry
  m.def("dist_sign", &DistSign, py::arg("x"), py::arg("z"));
  m.def("project_l1_ball", &ProjectL1Ball, py::arg("v"), py::arg("radius"));
  m.def("soft_threshold", &SoftThreshold, py::arg("v"), py::arg("tau"));
  m.def("f_theta", &FTheta, py::arg("theta"));
  m.def("expected_abs_xi_closed_form", &ExpectedAbsXiClosedForm, py::arg("theta"));
  m.def("expected_abs_xi",
        [](double theta, std::int64_t samples, std::uint64_t seed) {
          const McEstimate e = ExpectedAbsXi(theta, samples, seed);
          return py::make_tuple(e.estimate, e.std_error);
        },
        py::arg("theta"), py::arg("samples"), py::arg("seed"), "Returns (estimate, stderr).");
  m.def("srip_constants",
        [](const Matrix& a, int s, const std::string& mode, std::int64_t budget,
           std::uint64_t seed) {
          const SripMode md = mode == "sampled" ? SripMode::kSampled : SripMode::kExhaustive;
          const SripEstimate e = SripConstants(Wrap(a), s, md, budget, seed);
          return py::make_tuple(e.theta_minus, e.theta_plus);
        },
        py::arg("a"), py::arg("s"), py::arg("mode") = "exhaustive", py::arg("budget") = 0,
        py::arg("seed") = 0, "Returns (theta_minus, theta_plus).");
  m.def("gaussian_width",
        [](const std::string& set, int d, int s, std::int64_t samples, std::uint64_t seed) {
          WidthSet w = WidthSet::Sphere(d);
          if (set == "l1") {
            w = WidthSet::L1Ball(d);
          } else if (set == "kds") {
            w = WidthSet::Kds(d, s);
          } else if (set != "sphere") {
            throw py::value_error("set must be 'sphere', 'l1' or 'kds'");
          }
          const WidthEstimate e = GaussianWidth(w, samples, seed);
          return py::make_tuple(e.mean, e.std_error);
        },
        py::arg("set"), py::arg("d"), py::arg("s") = 1, py::arg("samples") = 10000,
        py::arg("seed") = 0, "Returns (width, stderr).");

  // solvers
  py::class_<SolverResult>(m, "SolverResult")
      .def_readonly("x_hat", &SolverResult::x_hat)
      .def_readonly("iterations", &SolverResult::iterations)
      .def_readonly("objective", &SolverResult::objective)
      .def_readonly("converged", &SolverResult::converged)
      .def_readonly("fixed_point_residual", &SolverResult::fixed_point_residual)
      .def_readonly("restart_index", &SolverResult::restart_index);

  m.def("error_reduction",
        [](const Matrix& a, const Vector& y, int max_iters, double tol, std::optional<double> step,
           int restarts, std::optional<Vector> init, std::uint64_t seed, int support) {
          return ErrorReduction(Wrap(a), y,
                                MakeConfig(max_iters, tol, step, restarts, init, seed, support));
        },
        py::arg("a"), py::arg("y"), PHASELS_SOLVER_ARGS);
  m.def("amplitude_gradient",
        [](const Matrix& a, const Vector& y, int max_iters, double tol, std::optional<double> step,
           int restarts, std::optional<Vector> init, std::uint64_t seed, int support) {
          return AmplitudeGradient(Wrap(a), y,
                                   MakeConfig(max_iters, tol, step, restarts, init, seed, support));
        },
        py::arg("a"), py::arg("y"), PHASELS_SOLVER_ARGS);
  m.def("constrained_lasso",
        [](const Matrix& a, const Vector& y, double radius, const std::string& loss, int max_iters,
           double tol, std::optional<double> step, int restarts, std::optional<Vector> init,
           std::uint64_t seed, int support) {
          return ConstrainedLassoSolve(
              Wrap(a), y, radius, ParseLoss(loss),
              MakeConfig(max_iters, tol, step, restarts, init, seed, support));
        },
        py::arg("a"), py::arg("y"), py::arg("radius"), py::arg("loss") = "amplitude",
        PHASELS_SOLVER_ARGS);
  m.def("regularized_lasso",
        [](const Matrix& a, const Vector& y, double lambda, const std::string& loss, int max_iters,
           double tol, std::optional<double> step, int restarts, std::optional<Vector> init,
           std::uint64_t seed, int support) {
          return RegularizedLassoSolve(
              Wrap(a), y, lambda, ParseLoss(loss),
              MakeConfig(max_iters, tol, step, restarts, init, seed, support));
        },
        py::arg("a"), py::arg("y"), py::arg("lam"), py::arg("loss") = "amplitude",
        PHASELS_SOLVER_ARGS);
  m.def("linear_least_squares",
        [](const Matrix& a, const Vector& y) { return LinearLeastSquares(Wrap(a), y); },
        py::arg("a"), py::arg("y"));
  m.def("spectral_init",
        [](const Matrix& a, const Vector& y, std::uint64_t seed, int support) {
          return SpectralInit(Wrap(a), y, seed, support);
        },
        py::arg("a"), py::arg("y"), py::arg("seed") = 0, py::arg("support_size") = 0);
  m.def("fixed_point_residual",
        [](const Matrix& a, const Vector& y, const Vector& x) {
          return FixedPointResidual(Wrap(a), y, x);
        },
        py::arg("a"), py::arg("y"), py::arg("x"));
  m.def("compute_lambda", &ComputeLambda, py::arg("eta"), py::arg("d"), py::arg("c") = 1.0);

  // harness
  py::class_<ExperimentRecord>(m, "Record")
      .def_readonly("trial", &ExperimentRecord::trial)
      .def_readonly("m", &ExperimentRecord::m)
      .def_readonly("d", &ExperimentRecord::d)
      .def_readonly("s", &ExperimentRecord::s)
      .def_readonly("noise_kind", &ExperimentRecord::noise_kind)
      .def_readonly("eta_norm", &ExperimentRecord::eta_norm)
      .def_readonly("mean_eta", &ExperimentRecord::mean_eta)
      .def_readonly("solver", &ExperimentRecord::solver)
      .def_readonly("lambda_", &ExperimentRecord::lambda)
      .def_readonly("R", &ExperimentRecord::R)
      .def_readonly("dist", &ExperimentRecord::dist)
      .def_readonly("objective", &ExperimentRecord::objective)
      .def_readonly("iterations", &ExperimentRecord::iterations)
      .def_readonly("converged", &ExperimentRecord::converged)
      .def_readonly("seed", &ExperimentRecord::seed);

  m.def("run_sweep",
        [](const std::string& config_text) {
          const RunConfig cfg = ParseRunConfig(config_text);
          py::gil_scoped_release release;
          return RunSweep(cfg.plan, {cfg.threads}).records;
        },
        py::arg("config_text"), "Runs the sweep described by config text; returns its records.");
  m.def("fit_loglog",
        [](const std::vector<double>& x, const std::vector<double>& y) {
          const SlopeFit f = FitLogLog(x, y);
          return py::make_tuple(f.slope, f.intercept, f.r_squared);
        },
        py::arg("x"), py::arg("y"), "Returns (slope, intercept, r_squared) of log y on log x.");

  m.def("run_cli",
        [](const std::vector<std::string>& args) {
          std::ostringstream out, err;
          const int code = RunCli(args, out, err);
          return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the command line in-process; returns (exit_code, stdout, stderr).");
}
