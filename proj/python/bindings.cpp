#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "qzeno/ensemble.hpp"
#include "qzeno/errors.hpp"
#include "qzeno/oracles.hpp"
#include "qzeno/run_config.hpp"
#include "qzeno/validation.hpp"

namespace py = pybind11;
using namespace qzeno;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

RunConfig config_from(const std::string& preset_name, const std::map<std::string, std::string>& overrides) {
  RunConfig c = preset_name.empty() ? RunConfig{} : preset(preset_name);
  for (const auto& [key, value] : overrides) apply_setting(c, key, value);
  validate(c);
  return c;
}

py::dict simulate(const std::string& preset_name, const std::map<std::string, std::string>& overrides, int workers) {
  const RunConfig config = config_from(preset_name, overrides);
  EnsembleResult result;
  {
    py::gil_scoped_release release;
    result = run_ensemble(build_model(config), config, {workers, false});
  }
  const auto& s = result.stats;
  py::dict mean, std_error;
  for (std::size_t k = 0; k < s.names.size(); ++k) {
    mean[py::str(s.names[k])] = to_array(s.mean[k]);
    std_error[py::str(s.names[k])] = to_array(s.std_error[k]);
  }
  py::dict out;
  out["t"] = to_array(s.times);
  out["mean"] = mean;
  out["std_error"] = std_error;
  out["n_trajectories"] = s.n_trajectories;
  out["total_jumps"] = s.total_jumps;
  out["stride"] = s.stride;
  out["max_jump_probability"] = s.max_jump_probability;
  out["config"] = to_config_text(config);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Quantum-jump simulator for Zeno and anti-Zeno dynamics";
  m.attr("__version__") = QZENO_VERSION;

  static py::exception<SimulationError> simulation_error(m, "SimulationError", PyExc_RuntimeError);
  static py::exception<ConfigError> config_error(m, "ConfigError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      std::string msg = e.what();
      if (!e.key().empty()) msg += " [key " + e.key() + "]";
      PyErr_SetString(config_error.ptr(), msg.c_str());
    } catch (const SimulationError& e) {
      PyErr_SetString(simulation_error.ptr(), e.what());
    }
  });

  py::class_<DetectorParams>(m, "DetectorParams")
      .def(py::init([](double gamma, double lambda, double omega_d, const std::string& target) {
             DetectorParams p{gamma, lambda, omega_d};
             if (target == "excited") {
               p.target = CouplingTarget::excited;
             } else if (target != "ground") {
               throw ConfigError("target must be 'ground' or 'excited'", "target");
             }
             return p;
           }),
           py::arg("gamma") = 10.0, py::arg("lam") = 1.0, py::arg("omega_d") = 1.0, py::arg("target") = "ground")
      .def_readwrite("gamma", &DetectorParams::gamma)
      .def_readwrite("lam", &DetectorParams::lambda)
      .def_readwrite("omega_d", &DetectorParams::omega_d);

  py::class_<DriveParams>(m, "DriveParams")
      .def(py::init([](double omega_r, double detuning) { return DriveParams{omega_r, detuning}; }),
           py::arg("omega_r") = 0.0, py::arg("detuning") = 0.0)
      .def_readwrite("omega_r", &DriveParams::omega_r)
      .def_readwrite("detuning", &DriveParams::detuning);

  py::class_<ReservoirSpec>(m, "ReservoirSpec")
      .def(py::init([](int n_modes, double half_width, double g0, double slope, double omega_a) {
             ReservoirSpec r{n_modes, half_width, g0, slope, omega_a};
             r.validate();
             return r;
           }),
           py::arg("n_modes") = 1001, py::arg("half_width") = 0.5, py::arg("g0") = 0.001262,
           py::arg("slope") = 0.0, py::arg("omega_a") = 1.0)
      .def_readwrite("n_modes", &ReservoirSpec::n_modes)
      .def_readwrite("half_width", &ReservoirSpec::half_width)
      .def_readwrite("g0", &ReservoirSpec::g0)
      .def_readwrite("slope", &ReservoirSpec::slope)
      .def_readwrite("omega_a", &ReservoirSpec::omega_a)
      .def("spacing", &ReservoirSpec::spacing);

  py::class_<RatePrediction>(m, "RatePrediction")
      .def_readonly("rate", &RatePrediction::rate)
      .def_property_readonly("formula_id", [](const RatePrediction& p) { return to_string(p.formula_id); })
      .def_readonly("validity_note", &RatePrediction::validity_note)
      .def("__repr__", [](const RatePrediction& p) {
        std::ostringstream out;
        out << "RatePrediction(rate=" << p.rate << ", formula_id='" << to_string(p.formula_id) << "')";
        return out.str();
      });

  m.def("measurement_time", py::overload_cast<double, double>(&measurement_time), py::arg("gamma"), py::arg("lam"));
  m.def("coherence_factor", &coherence_factor, py::arg("t"), py::arg("tau_m"));
  m.def("rabi_amplitude", &rabi_amplitude, py::arg("t"), py::arg("drive"));
  m.def("zeno_transition_rate", &zeno_transition_rate, py::arg("drive"), py::arg("tau_m"));
  m.def("rate_equation_population", &rate_equation_population, py::arg("t"), py::arg("rate"));
  m.def("golden_rule_rate", &golden_rule_rate, py::arg("reservoir"));
  m.def("resolvent", &resolvent, py::arg("z"), py::arg("reservoir"));
  m.def("corrected_free_decay_rate", &corrected_free_decay_rate, py::arg("reservoir"));
  m.def("measured_decay_rate", &measured_decay_rate, py::arg("reservoir"), py::arg("tau_m"));
  m.def("measured_decay_rate_series", &measured_decay_rate_series, py::arg("reservoir"), py::arg("tau_m"));
  m.def("anti_zeno_rate", &anti_zeno_rate, py::arg("reservoir"), py::arg("tau_m"));
  m.def(
      "laplace_decay_rate",
      [](const ReservoirSpec& r, double tau_m) {
        py::gil_scoped_release release;
        return laplace_decay_rate(r, tau_m);
      },
      py::arg("reservoir"), py::arg("tau_m"));

  m.def("preset_names", &preset_names);
  m.def(
      "config_text",
      [](const std::string& name, const std::map<std::string, std::string>& overrides) {
        return to_config_text(config_from(name, overrides));
      },
      py::arg("preset"), py::arg("overrides") = std::map<std::string, std::string>{});
  m.def("simulate", &simulate, py::arg("preset"), py::arg("overrides") = std::map<std::string, std::string>{},
        py::arg("workers") = 0,
        "Run an ensemble for a preset with `section.key` overrides. Returns times, per-observable means and "
        "standard errors as numpy arrays, and the resolved config text.");
  m.def(
      "fit_exponential_rate",
      [](const std::vector<double>& t, const std::vector<double>& y, double t_lo, double t_hi) {
        const FitResult f = fit_exponential_rate(t, y, t_lo, t_hi);
        return py::make_tuple(f.rate, f.intercept);
      },
      py::arg("t"), py::arg("values"), py::arg("t_lo"), py::arg("t_hi"));

  m.def(
      "validate",
      [](const std::string& suite, int n_trajectories, int workers) {
        ValidationOptions options;
        options.n_trajectories = n_trajectories;
        options.workers = workers;
        std::vector<CriterionResult> results;
        {
          py::gil_scoped_release release;
          results = run_suite(suite, options, nullptr);
        }
        py::list out;
        for (const auto& r : results) {
          py::dict d;
          d["id"] = r.id;
          d["name"] = r.name;
          d["measured"] = r.measured;
          d["expected"] = r.expected;
          d["tolerance"] = r.tolerance;
          d["passed"] = r.passed;
          d["detail"] = r.detail;
          out.append(d);
        }
        return out;
      },
      py::arg("suite"), py::arg("n_trajectories") = 1000, py::arg("workers") = 0);
}
