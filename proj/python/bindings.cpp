#include "fowt/active_learning.hpp"
#include "fowt/commands.hpp"
#include "fowt/config.hpp"
#include "fowt/errors.hpp"
#include "fowt/fatigue.hpp"
#include "fowt/fd_model.hpp"
#include "fowt/gpr.hpp"
#include "fowt/log.hpp"
#include "fowt/pipeline.hpp"
#include "fowt/spectra.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace fowt;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const Array& a)
{
  if (a.ndim() != 1)
    throw ValidationError("expected a one-dimensional array");
  return {a.data(), a.data() + a.size()};
}

Array to_array(const std::vector<double>& v)
{
  const std::vector<py::ssize_t> shape{static_cast<py::ssize_t>(v.size())};
  const std::vector<py::ssize_t> strides{static_cast<py::ssize_t>(sizeof(double))};
  return Array(shape, strides, v.data());
}

std::vector<Eigen::Vector2d> to_points(const Array& a)
{
  if (a.ndim() != 2 || a.shape(1) != 2)
    throw ValidationError("expected an (n, 2) array of (Hs, Tp) points");
  std::vector<Eigen::Vector2d> out;
  for (py::ssize_t i = 0; i < a.shape(0); ++i)
    out.emplace_back(a.at(i, 0), a.at(i, 1));
  return out;
}

Psd psd_hz(const Array& f_hz, const Array& values)
{
  return Psd(FrequencyGrid(to_vector(f_hz), FrequencyUnit::hertz), to_vector(values));
}

SnCurve sn_curve(double k_a, double b)
{
  return SnCurve{k_a, b};
}

py::dict evaluation_dict(const Evaluation& e)
{
  py::dict d;
  d["borgman_iterations"] = e.borgman_iterations;
  for (int k = 0; k < kHotSpots; ++k) {
    const auto& h = e.hot_spot[k];
    d[hot_spot_name(static_cast<HotSpot>(k))] = py::dict(py::arg("damage") = h.damage, py::arg("del") = h.del);
  }
  return d;
}

std::string run_command(const std::string& name,
                        const std::string& config_path,
                        const std::optional<std::string>& output_dir,
                        bool overwrite)
{
  RunConfig c = RunConfig::load(config_path);
  if (output_dir)
    c.output_dir = *output_dir;
  OutputWriter out(c.output_dir, c.hash(), overwrite);
  if (name == "report")
    return cmd_report(c, out);
  const Study study = Study::build(c);
  if (name == "seastates")
    return cmd_seastates(study, out);
  if (name == "fullgrid")
    return cmd_fullgrid(study, out);
  if (name == "surrogate")
    return cmd_surrogate(study, out);
  if (name == "mcs")
    return cmd_mcs(study, out);
  throw ValidationError("unknown command '" + name + "' (seastates, fullgrid, surrogate, mcs, report)");
}

} // namespace

PYBIND11_MODULE(_core, m)
{
  m.doc() = "Frequency-domain fatigue pipeline with an active-learning GPR surrogate";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.def("set_log_level", [](const std::string& level) {
    if (level == "debug")
      log::set_level(log::Level::debug);
    else if (level == "info")
      log::set_level(log::Level::info);
    else if (level == "warning")
      log::set_level(log::Level::warning);
    else if (level == "error")
      log::set_level(log::Level::error);
    else
      throw ValidationError("log level must be debug, info, warning or error");
  });

  // spectra
  m.def("jonswap", [](double hs, double tp, const Array& omega, double gamma) {
    return to_array(jonswap(hs, tp, FrequencyGrid(to_vector(omega)), gamma).values);
  }, py::arg("hs"), py::arg("tp"), py::arg("omega"), py::arg("gamma") = 3.3,
        "JONSWAP elevation spectrum [m^2 s/rad] on an angular-frequency grid [rad/s].");
  m.def("kaimal", [](double v_hub, double ti, const Array& omega, double length_scale) {
    return to_array(kaimal(v_hub, ti, length_scale, FrequencyGrid(to_vector(omega))).values);
  }, py::arg("v_hub"), py::arg("turbulence_intensity"), py::arg("omega"), py::arg("length_scale") = kIecKaimalLengthScale,
        "Kaimal longitudinal turbulence spectrum [(m/s)^2 s/rad] on an angular-frequency grid.");

  // fatigue
  py::class_<SpectralMoments>(m, "SpectralMoments")
    .def_readonly("m0", &SpectralMoments::m0)
    .def_readonly("m1", &SpectralMoments::m1)
    .def_readonly("m2", &SpectralMoments::m2)
    .def_readonly("m4", &SpectralMoments::m4)
    .def_property_readonly("alpha2", &SpectralMoments::alpha2);
  m.def("moments", [](const Array& f, const Array& g) { return moments(psd_hz(f, g)); }, py::arg("f_hz"),
        py::arg("psd"), "Spectral moments m0, m1, m2, m4 of a stress PSD in MPa^2/Hz.");
  m.def("dirlik_damage", [](const Array& f, const Array& g, double k_a, double b, double exposure) {
    return dirlik_damage(moments(psd_hz(f, g)), sn_curve(k_a, b), exposure);
  }, py::arg("f_hz"), py::arg("psd"), py::arg("k_a"), py::arg("b"), py::arg("exposure") = 3600.0);
  m.def("narrowband_damage", [](const Array& f, const Array& g, double k_a, double b, double exposure) {
    return narrowband_damage(moments(psd_hz(f, g)), sn_curve(k_a, b), exposure);
  }, py::arg("f_hz"), py::arg("psd"), py::arg("k_a"), py::arg("b"), py::arg("exposure") = 3600.0);
  m.def("del_1hz", [](const Array& f, const Array& g, double k_a, double b, double exposure) {
    return del_1hz(moments(psd_hz(f, g)), sn_curve(k_a, b), exposure);
  }, py::arg("f_hz"), py::arg("psd"), py::arg("k_a"), py::arg("b"), py::arg("exposure") = 3600.0);
  m.def("rainflow", [](const Array& signal) {
    const std::vector<double> s = to_vector(signal);
    std::vector<std::pair<double, double>> out;
    for (const Cycle& c : rainflow_count(s))
      out.emplace_back(c.range, c.count);
    return out;
  }, py::arg("signal"), "Rainflow cycles as (range, count) pairs; residue half cycles count 0.5.");
  m.def("synthesize_series", [](const Array& f, const Array& g, std::size_t n, double dt, std::uint64_t seed) {
    return to_array(synthesize_series(psd_hz(f, g), n, dt, seed));
  }, py::arg("f_hz"), py::arg("psd"), py::arg("n"), py::arg("dt"), py::arg("seed"));

  // GPR
  py::class_<GaussianProcess>(m, "GaussianProcess")
    .def_static("fit", [](const Array& x, const Array& y, int restarts, std::uint64_t seed) {
      return GaussianProcess::fit(to_points(x), to_vector(y), GpFitOptions{restarts, seed});
    }, py::arg("x"), py::arg("y"), py::arg("restarts") = 8, py::arg("seed") = 0)
    .def("predict", [](const GaussianProcess& gp, const Array& x) {
      const auto p = gp.predict_many(to_points(x));
      std::vector<double> mean, sd;
      for (const Prediction& q : p) {
        mean.push_back(q.mean);
        sd.push_back(q.sd);
      }
      return py::make_tuple(to_array(mean), to_array(sd));
    }, py::arg("x"), "Posterior mean and latent standard deviation at (n, 2) points.")
    .def("add_point", [](const GaussianProcess& gp, double hs, double tp, double y) {
      return gp.add_point(Eigen::Vector2d(hs, tp), y);
    })
    .def_property_readonly("size", &GaussianProcess::size)
    .def_property_readonly("hyperparams", [](const GaussianProcess& gp) {
      const Hyperparams& h = gp.hyperparams();
      return py::dict(py::arg("noise_sd") = h.noise_sd, py::arg("signal_scale") = h.signal_scale,
                      py::arg("length_scale") = h.length_scale, py::arg("prior_mean") = h.prior_mean);
    })
    .def("to_json", &GaussianProcess::to_json)
    .def_static("from_json", &GaussianProcess::from_json);

  // FD model
  py::class_<SeaStateEvaluator>(m, "Evaluator")
    .def_static("synthetic", [](std::uint64_t seed, int grid_points) {
      CoefficientTables t = synthetic_tables(seed, FrequencyGrid::uniform(0.05, 6.3, static_cast<std::size_t>(grid_points)));
      StructureGeometry g = StructureGeometry::from_tables(t);
      return SeaStateEvaluator(std::move(t), g);
    }, py::arg("seed"), py::arg("grid_points") = 500, "Evaluator on synthetic coefficient tables.")
    .def_static("from_tables", [](const std::string& path) {
      CoefficientTables t = load_tables(path);
      StructureGeometry g = StructureGeometry::from_tables(t);
      return SeaStateEvaluator(std::move(t), g);
    }, py::arg("path"))
    .def("evaluate", [](const SeaStateEvaluator& ev, double v_hub, double hs, double tp) {
      return evaluation_dict(ev.evaluate(SeaState{0, v_hub, hs, tp, 0.0}));
    }, py::arg("v_hub"), py::arg("hs"), py::arg("tp"),
       "Short-term damage and 1-Hz DEL of both hot spots for one sea state.")
    .def_property_readonly("calls", &SeaStateEvaluator::calls);

  // configuration and commands
  m.def("config_hash", [](const std::string& path) { return RunConfig::load(path).hash(); }, py::arg("config"));
  m.def("canonical_config", [](const std::string& path) { return RunConfig::load(path).to_json(); }, py::arg("config"));
  m.def("run_command", &run_command, py::arg("name"), py::arg("config"), py::arg("output_dir") = std::nullopt,
        py::arg("overwrite") = false, py::call_guard<py::gil_scoped_release>(),
        "Run one pipeline command (seastates, fullgrid, surrogate, mcs, report); returns its summary.");
  m.def("generate_site", &cmd_generate_site, py::arg("seed"), py::arg("years"), py::arg("path"),
        py::arg("overwrite") = false);
}
