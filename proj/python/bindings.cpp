#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "lsqcolor/cli.hpp"
#include "lsqcolor/estimators.hpp"
#include "lsqcolor/io.hpp"
#include "lsqcolor/matched_filter.hpp"
#include "lsqcolor/noise.hpp"
#include "lsqcolor/spectral.hpp"

namespace py = pybind11;
using namespace lsqcolor;

namespace {

NoiseModel noise_from_json(const std::string& spec, double dt, std::size_t n,
                           std::optional<std::size_t> max_lag) {
  return NoiseModel(parse_noise_spec(spec, dt, n), dt, max_lag.value_or(n > 0 ? n - 1 : 0));
}

DesignMatrix design_from_json(const std::string& spec, Eigen::Index n, double dt, long origin) {
  const auto parsed = parse_model_spec(spec);
  return build_design_matrix(parsed.basis, n, dt, origin);
}

py::tuple run_cli(const cli::RunConfig& config) {
  std::ostringstream out, err;
  const int rc = cli::run(config, out, err);
  return py::make_tuple(rc, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Linear model fitting under stationary colored noise";

  static py::exception<Error> error(m, "LsqcolorError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  py::class_<SampledSignal>(m, "SampledSignal")
      .def(py::init<double, CVector, long>(), py::arg("dt"), py::arg("values"),
           py::arg("origin_index") = 1)
      .def_property_readonly("dt", &SampledSignal::dt)
      .def_property_readonly("values", &SampledSignal::values)
      .def_property_readonly("origin_index", &SampledSignal::origin_index)
      .def("__len__", &SampledSignal::size);

  py::class_<DesignMatrix>(m, "DesignMatrix")
      .def(py::init<CMatrix, double, std::vector<std::string>, long>(), py::arg("entries"),
           py::arg("dt"), py::arg("labels") = std::vector<std::string>{},
           py::arg("origin_index") = 1)
      .def_static("from_json", &design_from_json, py::arg("spec"), py::arg("n"), py::arg("dt"),
                  py::arg("origin_index") = 1)
      .def_property_readonly("entries", &DesignMatrix::entries)
      .def_property_readonly("dt", &DesignMatrix::dt)
      .def_property_readonly("labels", &DesignMatrix::labels)
      .def_property_readonly("condition_number", &DesignMatrix::condition_number);

  py::class_<Estimate>(m, "Estimate")
      .def_readonly("x_star", &Estimate::x_star)
      .def_readonly("covariance", &Estimate::covariance)
      .def_readonly("residual_norm", &Estimate::residual_norm)
      .def_property_readonly("method",
                             [](const Estimate& e) { return std::string(method_name(e.method)); })
      .def_property_readonly("condition_number",
                             [](const Estimate& e) { return e.condition.condition_number; })
      .def_property_readonly("solve_path", [](const Estimate& e) { return e.condition.solve_path; });

  py::class_<NoiseModel>(m, "NoiseModel")
      .def_static("from_json", &noise_from_json, py::arg("spec"), py::arg("dt"), py::arg("n"),
                  py::arg("max_lag") = std::nullopt)
      .def("psd", &NoiseModel::psd, py::arg("f"))
      .def_property_readonly("dt", &NoiseModel::dt)
      .def_property_readonly("s_floor", &NoiseModel::s_floor)
      .def_property_readonly("s_max", &NoiseModel::s_max)
      .def_property_readonly("silent", &NoiseModel::silent)
      .def_property_readonly("correlation", &NoiseModel::correlation);

  py::class_<ToeplitzCovariance>(m, "ToeplitzCovariance")
      .def(py::init<std::vector<cplx>>(), py::arg("lags"))
      .def("dense", &ToeplitzCovariance::dense)
      .def_property_readonly("lags", &ToeplitzCovariance::lags)
      .def_property_readonly("jitter", &ToeplitzCovariance::jitter);
  m.def("build_covariance", &build_covariance, py::arg("model"), py::arg("n"));

  m.def(
      "synthesize_noise",
      [](const NoiseModel& model, Eigen::Index n, std::uint64_t seed, std::uint64_t trial) {
        return synthesize_noise(model, n, seed, trial).values();
      },
      py::arg("model"), py::arg("n"), py::arg("seed"), py::arg("trial") = 0);

  m.def("ols", &ols, py::arg("design"), py::arg("data"));
  m.def("gls_time", &gls_time, py::arg("design"), py::arg("data"), py::arg("omega"));
  m.def("gls_spectral", &gls_spectral, py::arg("design"), py::arg("data"), py::arg("model"),
        py::arg("pad"), py::arg("grid_size") = 0);
  m.def("ols_covariance_time",
        py::overload_cast<const DesignMatrix&, const ToeplitzCovariance&>(&ols_covariance_time),
        py::arg("design"), py::arg("omega"));
  m.def("ols_covariance_time",
        py::overload_cast<const DesignMatrix&, const CMatrix&>(&ols_covariance_time),
        py::arg("design"), py::arg("omega"));
  m.def("ols_covariance_freq", &ols_covariance_freq, py::arg("design"), py::arg("model"),
        py::arg("grid_size"));
  m.def("loewner_leq", &loewner_leq, py::arg("a"), py::arg("b"), py::arg("tol") = 0.0);

  py::class_<ZeroExtendedSequence>(m, "ZeroExtendedSequence")
      .def(py::init<long, CMatrix>(), py::arg("support_start"), py::arg("block"))
      .def_static("from_design", &ZeroExtendedSequence::from_design)
      .def_static("from_signal", &ZeroExtendedSequence::from_signal)
      .def_property_readonly("support_start", &ZeroExtendedSequence::support_start)
      .def_property_readonly("support_end", &ZeroExtendedSequence::support_end)
      .def_property_readonly("block", &ZeroExtendedSequence::block);

  m.def(
      "dtft",
      [](const ZeroExtendedSequence& g, double dt, std::size_t grid) {
        auto s = dtft(g, dt, grid);
        return py::make_tuple(s.freqs, s.values);
      },
      py::arg("sequence"), py::arg("dt"), py::arg("grid_size"));
  m.def("matrix_scalar_product", &matrix_scalar_product, py::arg("a"), py::arg("b"));
  m.def("parseval_product", &parseval_product, py::arg("a"), py::arg("b"), py::arg("dt"),
        py::arg("grid_size"));
  m.def("gen_convolve", &gen_convolve, py::arg("q"), py::arg("x"));
  m.def("gen_deconvolve", &gen_deconvolve, py::arg("q"), py::arg("y"), py::arg("pad"),
        py::arg("grid_size") = 0);

  m.def("spectral_gls_1d",
        py::overload_cast<const ZeroExtendedSequence&, const SampledSignal&, const NoiseModel&,
                          std::size_t>(&spectral_gls_1d),
        py::arg("template"), py::arg("data"), py::arg("model"), py::arg("grid_size"));
  py::class_<MatchedFilter>(m, "MatchedFilter")
      .def_readonly("gain", &MatchedFilter::gain)
      .def_readonly("t0", &MatchedFilter::t0)
      .def_readonly("template_label", &MatchedFilter::template_label);
  m.def("build_matched_filter", &build_matched_filter, py::arg("template"), py::arg("model"),
        py::arg("grid_size"), py::arg("t0") = 0.0, py::arg("gain") = std::nullopt,
        py::arg("label") = "template");
  m.def("apply_filter", &apply_filter, py::arg("filter"), py::arg("data"));

  py::class_<MismatchResult>(m, "MismatchResult")
      .def_readonly("v_used", &MismatchResult::v_used)
      .def_readonly("v_true", &MismatchResult::v_true)
      .def_readonly("measured_rel_excess", &MismatchResult::measured_rel_excess)
      .def_readonly("predicted_rel_excess", &MismatchResult::predicted_rel_excess)
      .def_readonly("large_epsilon", &MismatchResult::large_epsilon);
  m.def("psd_mismatch_variance", &psd_mismatch_variance, py::arg("template"), py::arg("model"),
        py::arg("w"), py::arg("epsilon"), py::arg("grid_size"));

  py::class_<cli::RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_readwrite("command", &cli::RunConfig::command)
      .def_readwrite("data_path", &cli::RunConfig::data_path)
      .def_readwrite("model", &cli::RunConfig::model)
      .def_readwrite("noise", &cli::RunConfig::noise)
      .def_readwrite("method", &cli::RunConfig::method)
      .def_readwrite("grid_factor", &cli::RunConfig::grid_factor)
      .def_readwrite("pad_factor", &cli::RunConfig::pad_factor)
      .def_readwrite("seed", &cli::RunConfig::seed)
      .def_readwrite("trials", &cli::RunConfig::trials)
      .def_readwrite("out_path", &cli::RunConfig::out_path)
      .def_readwrite("format", &cli::RunConfig::format)
      .def_readwrite("perturbation", &cli::RunConfig::perturbation)
      .def_readwrite("epsilons", &cli::RunConfig::epsilons)
      .def_readwrite("workers", &cli::RunConfig::workers);
  m.def("run", &run_cli, py::arg("config"),
        "Runs a CLI command; returns (exit_code, stdout, stderr).");
}
