// Copyright 2026 The polariton-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "polsim/dynamics.hpp"
#include "polsim/errors.hpp"
#include "polsim/floquet.hpp"
#include "polsim/model.hpp"
#include "polsim/scenarios.hpp"

namespace py = pybind11;
using namespace polsim;

namespace {

ExperimentConfig make_config(const std::string& name, const std::map<std::string, std::string>& overrides) {
  ExperimentConfig c = ExperimentConfig::defaults(name);
  for (const auto& [k, v] : overrides) c.set(k, v);
  return c;
}

py::dict table_of(const RunResult& r) {
  py::dict out;
  if (r.matrix) {
    const auto& m = *r.matrix;
    out[py::str(m.row_label)] = m.rows;
    out[py::str(m.col_label)] = m.cols;
    out[py::str(m.value_label)] = m.values;
    return out;
  }
  const Curve& c = r.curves.front();
  out[py::str(c.x_label)] = c.x;
  out[py::str(c.y_label)] = c.y;
  for (const auto& [name, v] : c.columns) out[py::str(name)] = v;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Driven-dissipative molecule-cavity simulations";
  m.attr("__version__") = kVersion;

  static py::exception<InvalidArgument> invalid(m, "InvalidArgument", PyExc_ValueError);
  static py::exception<ConfigError> config(m, "ConfigError", invalid.ptr());
  static py::exception<NumericalError> numerical(m, "NumericalError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      py::set_error(config, e.what());
    } catch (const InvalidArgument& e) {
      py::set_error(invalid, e.what());
    } catch (const NumericalError& e) {
      py::set_error(numerical, e.what());
    }
  });

  py::enum_<CavityFrame>(m, "CavityFrame")
      .value("lab", CavityFrame::lab)
      .value("displaced", CavityFrame::displaced);
  py::enum_<Propagator>(m, "Propagator")
      .value("runge_kutta", Propagator::runge_kutta)
      .value("eigen", Propagator::eigen);

  py::class_<SystemParams>(m, "SystemParams")
      .def(py::init<>())
      .def_readwrite("g", &SystemParams::g)
      .def_readwrite("kappa", &SystemParams::kappa)
      .def_readwrite("gamma", &SystemParams::gamma)
      .def_readwrite("branching_beta", &SystemParams::branching_beta)
      .def_readwrite("gamma_et", &SystemParams::gamma_et)
      .def_readwrite("gamma_tg", &SystemParams::gamma_tg)
      .def_readwrite("gamma_deph", &SystemParams::gamma_deph)
      .def_readwrite("delta_cavity", &SystemParams::delta_cavity)
      .def_readwrite("delta_molecule", &SystemParams::delta_molecule)
      .def_readwrite("lambda_nm", &SystemParams::lambda_nm)
      .def_readwrite("eta_cpl", &SystemParams::eta_cpl)
      .def("triplet_ratio", &SystemParams::triplet_ratio)
      .def("with_triplet_ratio", &SystemParams::with_triplet_ratio, py::arg("r"))
      .def("validate", &SystemParams::validate);

  py::class_<Tone>(m, "Tone")
      .def(py::init([](double detuning, double power) { return Tone{detuning, power}; }), py::arg("detuning"),
           py::arg("power"))
      .def_readwrite("detuning", &Tone::detuning)
      .def_readwrite("power", &Tone::power);

  py::class_<DriveSpec>(m, "DriveSpec")
      .def_static("monochromatic", &DriveSpec::monochromatic, py::arg("detuning"), py::arg("power"))
      .def_static("bichromatic", &DriveSpec::bichromatic, py::arg("first"), py::arg("second"))
      .def_readonly("tones", &DriveSpec::tones);

  m.def("cooperativity", py::overload_cast<double, double, double>(&cooperativity), py::arg("g"), py::arg("kappa"),
        py::arg("gamma"));
  m.def("power_to_flux", &power_to_flux, py::arg("power_pw"), py::arg("lambda_nm"));
  m.def("photons_per_lifetime", &photons_per_lifetime, py::arg("flux"), py::arg("kappa_ghz"));
  m.def("power_for_photons_per_lifetime", &power_for_photons_per_lifetime, py::arg("n_bar"), py::arg("kappa_ghz"),
        py::arg("lambda_nm"));
  m.def("damped_rabi_frequency", &damped_rabi_frequency, py::arg("params"));

  m.def(
      "steady_state",
      [](const SystemParams& p, const DriveSpec& drive, int n_fock, CavityFrame frame) {
        const Stationary s = stationary(p, drive, build_space(n_fock), frame);
        py::dict out;
        out["rho"] = s.rho.matrix();
        out["field_mean"] = s.field_mean();
        out["photon_number"] = s.photon_number();
        out["rho_gg"] = s.population(Level::g);
        out["rho_ee"] = s.population(Level::e);
        out["rho_tt"] = s.population(Level::t);
        return out;
      },
      py::arg("params"), py::arg("drive"), py::arg("n_fock") = 6, py::arg("frame") = CavityFrame::displaced,
      "Stationary state of a monochromatic drive and its cavity observables.");

  m.def(
      "g2_correlation",
      [](const SystemParams& p, const DriveSpec& drive, const std::vector<double>& tau, int n_fock,
         CavityFrame frame, Propagator prop) {
        return g2_correlation(p, drive, tau, build_space(n_fock), {frame, prop});
      },
      py::arg("params"), py::arg("drive"), py::arg("tau_ns"), py::arg("n_fock") = 6,
      py::arg("frame") = CavityFrame::displaced, py::arg("propagator") = Propagator::runge_kutta);

  m.def(
      "field_harmonics",
      [](const SystemParams& p, const DriveSpec& drive, int n_fock, std::optional<int> n_harmonics) {
        FloquetOptions o;
        o.n_harmonics = n_harmonics;
        return field_harmonics(periodic_steady_state(p, drive, build_space(n_fock), o));
      },
      py::arg("params"), py::arg("drive"), py::arg("n_fock") = 6, py::arg("n_harmonics") = py::none(),
      "Cavity field harmonics alpha_n of the periodic steady state under two tones.");

  m.def(
      "probe_transmission",
      [](const SystemParams& p, const Tone& pump, const Tone& probe, int n_fock) {
        return probe_transmission(p, pump, probe, build_space(n_fock)).transmission;
      },
      py::arg("params"), py::arg("pump"), py::arg("probe"), py::arg("n_fock") = 6);

  m.def("experiment_names", [] {
    std::vector<std::string> names;
    for (Experiment e : named_experiments()) names.push_back(to_string(e));
    names.push_back(to_string(Experiment::custom));
    return names;
  });

  m.def(
      "default_config",
      [](const std::string& name) { return ExperimentConfig::defaults(name).values(); }, py::arg("experiment"));

  py::class_<RunResult>(m, "RunResult")
      .def_property_readonly("experiment", [](const RunResult& r) { return to_string(r.experiment); })
      .def_readonly("scalars", &RunResult::scalars)
      .def_readonly("provenance", &RunResult::provenance)
      .def_property_readonly("table", &table_of)
      .def_property_readonly("csv", &csv_text)
      .def_property_readonly("meta", &meta_text)
      .def("write", &write_outputs, py::arg("out_dir"));

  m.def(
      "run",
      [](const std::string& name, const std::map<std::string, std::string>& overrides, int workers) {
        const ExperimentConfig c = make_config(name, overrides);
        py::gil_scoped_release release;
        return run(c, {workers});
      },
      py::arg("experiment"), py::arg("overrides") = std::map<std::string, std::string>{}, py::arg("workers") = 1,
      "Runs one experiment with key=value overrides (values as strings).");

  m.def(
      "convergence_check",
      [](const std::string& name, const std::map<std::string, std::string>& overrides, int workers) {
        const ExperimentConfig c = make_config(name, overrides);
        ConvergenceReport r;
        {
          py::gil_scoped_release release;
          r = convergence_check(c, {workers});
        }
        py::dict out;
        out["pass"] = r.pass;
        out["worst"] = r.worst;
        out["changes"] = r.changes;
        out["n_fock_check"] = r.n_fock_check;
        out["n_harmonics_check"] = r.n_harmonics_check;
        return out;
      },
      py::arg("experiment"), py::arg("overrides") = std::map<std::string, std::string>{}, py::arg("workers") = 1);
}
