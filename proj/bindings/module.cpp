// Python bindings for the calibration engine, the emulator, the acquisition
// functions, and the performance model. List-based signatures only; no numpy
// dependency.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "seqcal/acquisition.hpp"
#include "seqcal/config.hpp"
#include "seqcal/csv.hpp"
#include "seqcal/engine.hpp"
#include "seqcal/gp.hpp"
#include "seqcal/metrics.hpp"
#include "seqcal/perf.hpp"
#include "seqcal/problem.hpp"
#include "seqcal/testbed.hpp"

namespace py = pybind11;
using namespace seqcal;

PYBIND11_MODULE(seqcal, m) {
  m.doc() = "Sequential Bayesian calibration with batch acquisitions and a Monte Carlo "
            "performance model";

  py::register_exception<EvaluationError>(m, "EvaluationError");
  py::register_exception<InfeasibleTarget>(m, "InfeasibleTarget");
  py::register_exception<ConfigError>(m, "ConfigError");

  py::class_<ParameterSpace>(m, "ParameterSpace")
      .def(py::init<std::vector<double>, std::vector<double>>(), py::arg("lower"),
           py::arg("upper"))
      .def_readwrite("lower", &ParameterSpace::lower)
      .def_readwrite("upper", &ParameterSpace::upper)
      .def("dim", &ParameterSpace::dim)
      .def("volume", &ParameterSpace::volume)
      .def("contains", &ParameterSpace::contains);

  py::class_<CalibrationProblem>(m, "CalibrationProblem")
      .def_readwrite("name", &CalibrationProblem::name)
      .def_readwrite("space", &CalibrationProblem::space)
      .def_readwrite("y", &CalibrationProblem::y)
      .def_readwrite("noise_var", &CalibrationProblem::noise_var)
      .def("evaluate", &CalibrationProblem::evaluate, py::arg("theta"))
      .def("prior_density", &CalibrationProblem::prior_density, py::arg("theta"))
      .def("unnormalized_posterior", &CalibrationProblem::unnormalized_posterior,
           py::arg("theta"), py::arg("eta"));

  py::class_<Sample>(m, "Sample")
      .def(py::init<>())
      .def(py::init([](std::vector<double> theta, double output) {
             return Sample{std::move(theta), output};
           }),
           py::arg("theta"), py::arg("output"))
      .def_readwrite("theta", &Sample::theta)
      .def_readwrite("output", &Sample::output);

  m.def("testbed_names", &testbed::names);
  m.def("make_problem", &testbed::make, py::arg("name"));
  m.def("true_unnormalized_posterior", &testbed::true_unnormalized_posterior, py::arg("problem"),
        py::arg("theta"));

  py::class_<KernelParams>(m, "KernelParams")
      .def(py::init<>())
      .def_readwrite("log_lengthscales", &KernelParams::log_lengthscales)
      .def_readwrite("scale", &KernelParams::scale)
      .def_readwrite("nugget", &KernelParams::nugget);

  py::class_<FitConfig>(m, "FitConfig")
      .def(py::init<>())
      .def_readwrite("multistarts", &FitConfig::multistarts)
      .def_readwrite("seed", &FitConfig::seed)
      .def_readwrite("max_iter", &FitConfig::max_iter)
      .def_readwrite("warm_start", &FitConfig::warm_start);

  py::class_<Prediction>(m, "Prediction")
      .def_readonly("mean", &Prediction::mean)
      .def_readonly("var", &Prediction::var);

  py::class_<GpPosterior>(m, "GpPosterior")
      .def_static("fit", &GpPosterior::fit, py::arg("data"), py::arg("config") = FitConfig{})
      .def_static("with_params", &GpPosterior::with_params, py::arg("data"), py::arg("params"),
                  py::arg("center"))
      .def("predict", &GpPosterior::predict, py::arg("theta"))
      .def("posterior_cov", &GpPosterior::posterior_cov, py::arg("theta"), py::arg("theta_star"))
      .def("tau_sq", &GpPosterior::tau_sq, py::arg("theta"), py::arg("theta_star"))
      .def("kernel", &GpPosterior::kernel, py::arg("a"), py::arg("b"))
      .def("params", &GpPosterior::params)
      .def("output_center", &GpPosterior::output_center)
      .def("__len__", [](const GpPosterior& gp) { return static_cast<std::size_t>(gp.size()); });

  m.def("matern_correlation", &matern_correlation, py::arg("a"), py::arg("b"),
        py::arg("log_lengthscales"));

  py::enum_<AcqKind>(m, "AcqKind")
      .value("PI", AcqKind::PI)
      .value("EI", AcqKind::EI)
      .value("EIVAR", AcqKind::EIVAR)
      .value("HYBRID", AcqKind::HYBRID)
      .value("RND", AcqKind::RND);

  py::enum_<LiarRule>(m, "LiarRule")
      .value("MEAN_OUTPUT", LiarRule::MeanOutput)
      .value("MIN_OUTPUT", LiarRule::MinOutput)
      .value("MAX_OUTPUT", LiarRule::MaxOutput);

  py::class_<AcquisitionSpec>(m, "AcquisitionSpec")
      .def(py::init<>())
      .def_readwrite("kind", &AcquisitionSpec::kind)
      .def_readwrite("candidate_count", &AcquisitionSpec::candidate_count)
      .def_readwrite("reference_count", &AcquisitionSpec::reference_count)
      .def_readwrite("eivar_on_even", &AcquisitionSpec::eivar_on_even)
      .def_readwrite("liar", &AcquisitionSpec::liar);

  m.def("best_loss", &best_loss, py::arg("problem"), py::arg("samples"));
  m.def("prob_improvement", &prob_improvement, py::arg("gp"), py::arg("problem"),
        py::arg("theta_star"), py::arg("delta"));
  m.def("expected_unimprovement", &expected_unimprovement, py::arg("gp"), py::arg("problem"),
        py::arg("theta_star"), py::arg("delta"));
  m.def("eivar", &eivar, py::arg("gp"), py::arg("problem"), py::arg("theta_star"),
        py::arg("theta_ref"));
  m.def("build_batch", &build_batch, py::arg("spec"), py::arg("gp"), py::arg("problem"),
        py::arg("t"), py::arg("b"), py::arg("delta"), py::arg("theta_ref"), py::arg("seed"),
        py::call_guard<py::gil_scoped_release>());

  py::class_<SeedTriple>(m, "SeedTriple")
      .def(py::init<>())
      .def_readwrite("init", &SeedTriple::init)
      .def_readwrite("candidates", &SeedTriple::candidates)
      .def_readwrite("rng", &SeedTriple::rng);

  py::enum_<ClockMode>(m, "ClockMode")
      .value("MEASURED", ClockMode::Measured)
      .value("VIRTUAL", ClockMode::Virtual);

  py::class_<EngineConfig>(m, "EngineConfig")
      .def(py::init<>())
      .def_readwrite("n0", &EngineConfig::n0)
      .def_readwrite("n", &EngineConfig::n)
      .def_readwrite("b", &EngineConfig::b)
      .def_readwrite("w", &EngineConfig::w)
      .def_readwrite("spec", &EngineConfig::spec)
      .def_readwrite("seeds", &EngineConfig::seeds)
      .def_readwrite("replicate_id", &EngineConfig::replicate_id)
      .def_readwrite("clock", &EngineConfig::clock)
      .def_readwrite("compute_mad", &EngineConfig::compute_mad)
      .def_readwrite("mad_grid", &EngineConfig::mad_grid)
      .def_readwrite("fit_multistarts", &EngineConfig::fit_multistarts)
      .def_readwrite("fit_max_iter", &EngineConfig::fit_max_iter)
      .def_readwrite("fresh_fit_every", &EngineConfig::fresh_fit_every)
      .def("validate", &EngineConfig::validate);

  py::class_<JobRecord>(m, "JobRecord")
      .def_readonly("job_id", &JobRecord::job_id)
      .def_readonly("stage", &JobRecord::stage)
      .def_readonly("theta", &JobRecord::theta)
      .def_readonly("output", &JobRecord::output)
      .def_readonly("submit_time", &JobRecord::submit_time)
      .def_readonly("complete_time", &JobRecord::complete_time);

  py::class_<StageRecord>(m, "StageRecord")
      .def_readonly("stage", &StageRecord::stage)
      .def_readonly("n_t", &StageRecord::n_t)
      .def_readonly("acquired", &StageRecord::acquired)
      .def_readonly("acq_time", &StageRecord::acq_time)
      .def_readonly("delta_t", &StageRecord::delta_t)
      .def_readonly("mad_t", &StageRecord::mad_t)
      .def_readonly("gp", &StageRecord::gp);

  py::class_<DesignTrace>(m, "DesignTrace")
      .def_readonly("replicate_id", &DesignTrace::replicate_id)
      .def_readonly("problem", &DesignTrace::problem)
      .def_readonly("y", &DesignTrace::y)
      .def_readonly("noise_var", &DesignTrace::noise_var)
      .def_readonly("n0", &DesignTrace::n0)
      .def_readonly("n", &DesignTrace::n)
      .def_readonly("b", &DesignTrace::b)
      .def_readonly("w", &DesignTrace::w)
      .def_readonly("jobs", &DesignTrace::jobs)
      .def_readonly("stages", &DesignTrace::stages)
      .def_readonly("complete", &DesignTrace::complete)
      .def_readonly("error", &DesignTrace::error);

  m.def("initial_design", &initial_design, py::arg("problem"), py::arg("n0"), py::arg("seed"));
  m.def("run_design", &run_design, py::arg("problem"), py::arg("config"),
        py::call_guard<py::gil_scoped_release>());

  py::enum_<CurveKind>(m, "CurveKind")
      .value("EXPONENTIAL", CurveKind::Exponential)
      .value("EMPIRICAL", CurveKind::Empirical)
      .value("PIECEWISE_BATCH", CurveKind::PiecewiseBatch);

  py::class_<ProgressCurve>(m, "ProgressCurve")
      .def(py::init<>())
      .def_readwrite("kind", &ProgressCurve::kind)
      .def_readwrite("exponent", &ProgressCurve::exponent)
      .def_readwrite("total", &ProgressCurve::total)
      .def_readwrite("table", &ProgressCurve::table)
      .def_readwrite("batch", &ProgressCurve::batch);

  m.def("error_at", &error_at, py::arg("curve"), py::arg("j"));
  m.def("evals_to_accuracy", &evals_to_accuracy, py::arg("curve"), py::arg("alpha"));

  py::enum_<AcqTimeKind>(m, "AcqTimeKind")
      .value("CONSTANT", AcqTimeKind::Constant)
      .value("LINEAR", AcqTimeKind::Linear)
      .value("QUADRATIC", AcqTimeKind::Quadratic);

  py::class_<AcqTimeModel>(m, "AcqTimeModel")
      .def(py::init<>())
      .def_readwrite("kind", &AcqTimeModel::kind)
      .def_readwrite("a", &AcqTimeModel::a)
      .def_readwrite("b", &AcqTimeModel::b)
      .def_readwrite("c", &AcqTimeModel::c)
      .def_readwrite("tail_constant", &AcqTimeModel::tail_constant)
      .def_readwrite("measured", &AcqTimeModel::measured);

  m.def("acq_time", &acq_time, py::arg("model"), py::arg("b"), py::arg("t"), py::arg("n"));

  py::enum_<RunTimeKind>(m, "RunTimeKind")
      .value("CONSTANT", RunTimeKind::Constant)
      .value("TRUNCATED_NORMAL", RunTimeKind::TruncatedNormal);

  py::class_<RunTimeModel>(m, "RunTimeModel")
      .def(py::init<>())
      .def_readwrite("kind", &RunTimeModel::kind)
      .def_readwrite("mean", &RunTimeModel::mean)
      .def_readwrite("stddev", &RunTimeModel::stddev)
      .def_readwrite("floor", &RunTimeModel::floor)
      .def_readwrite("seed", &RunTimeModel::seed);

  m.def("sample_runtime", &sample_runtime, py::arg("model"), py::arg("omega"), py::arg("j"));

  py::class_<PerfScenario>(m, "PerfScenario")
      .def(py::init<>())
      .def_readwrite("b", &PerfScenario::b)
      .def_readwrite("w", &PerfScenario::w)
      .def_readwrite("acq_label", &PerfScenario::acq_label)
      .def_readwrite("stop_count", &PerfScenario::stop_count)
      .def_readwrite("curve", &PerfScenario::curve)
      .def_readwrite("acq_model", &PerfScenario::acq_model)
      .def_readwrite("run_model", &PerfScenario::run_model)
      .def_readwrite("replicates", &PerfScenario::replicates)
      .def("validate", &PerfScenario::validate);

  py::class_<PerfJob>(m, "PerfJob")
      .def_readonly("id", &PerfJob::id)
      .def_readonly("stage", &PerfJob::stage)
      .def_readonly("end_time", &PerfJob::end_time)
      .def_readonly("consumed_by", &PerfJob::consumed_by);

  py::class_<PerfTrace>(m, "PerfTrace")
      .def_readonly("replicate", &PerfTrace::replicate)
      .def_readonly("jobs", &PerfTrace::jobs)
      .def_readonly("stage_end", &PerfTrace::stage_end)
      .def_readonly("pending_sizes", &PerfTrace::pending_sizes)
      .def_readonly("n_target", &PerfTrace::n_target)
      .def_readonly("final_count", &PerfTrace::final_count);

  m.def("simulate", &simulate, py::arg("scenario"), py::arg("omega"));
  m.def("run_scenario", &run_scenario, py::arg("scenario"),
        py::call_guard<py::gil_scoped_release>());

  py::class_<SeriesPoint>(m, "SeriesPoint")
      .def_readonly("x", &SeriesPoint::x)
      .def_readonly("y", &SeriesPoint::y)
      .def_readonly("y_lo", &SeriesPoint::y_lo)
      .def_readonly("y_hi", &SeriesPoint::y_hi);

  py::class_<MetricSeries>(m, "MetricSeries")
      .def_readonly("label", &MetricSeries::label)
      .def_readonly("x_unit", &MetricSeries::x_unit)
      .def_readonly("y_unit", &MetricSeries::y_unit)
      .def_readonly("points", &MetricSeries::points);

  m.def("delta_series", &delta_series, py::arg("trace"));
  m.def("mad_series", &mad_series, py::arg("trace"));
  m.def("makespan", &makespan, py::arg("trace"));
  m.def("idle_time", &idle_time, py::arg("trace"), py::arg("w"));
  m.def("computing_hours", &computing_hours, py::arg("trace"), py::arg("w"));

  m.def("write_design_trace", &write_design_trace, py::arg("trace"), py::arg("dir"));
  m.def("read_design_trace", &read_design_trace, py::arg("dir"));
  m.def("write_perf_traces", &write_perf_traces, py::arg("traces"), py::arg("scenario"),
        py::arg("dir"));
}
