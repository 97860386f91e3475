#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "homctl/errors.hpp"
#include "homctl/experiments.hpp"
#include "homctl/scenario_file.hpp"
#include "homctl/serialization.hpp"

namespace py = pybind11;
using namespace homctl;

namespace {

PyObject* error_type = nullptr;

ControllerKind kind_from(const std::string& name) {
  auto k = parse_controller_kind(name);
  if (!k) throw Error(ErrorKind::config, "unknown controller kind '" + name + "'");
  return *k;
}

Matrix stack(const std::vector<Vector>& rows, Eigen::Index width) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), width);
  for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return m;
}

py::dict trace_dict(const SimulationTrace& tr) {
  py::dict d;
  d["t"] = Eigen::Map<const Vector>(tr.t.data(), static_cast<Eigen::Index>(tr.t.size())).eval();
  d["x"] = stack(tr.x, tr.state_dim);
  d["u"] = stack(tr.u, tr.input_dim);
  d["s"] = Eigen::Map<const Vector>(tr.s.data(), static_cast<Eigen::Index>(tr.s.size())).eval();
  d["y"] = tr.has_predictor() ? py::cast(stack(tr.y, tr.state_dim)) : py::none();
  d["settling_time"] = tr.settling_time ? py::cast(*tr.settling_time) : py::none();
  d["settle_epsilon"] = tr.settle_epsilon;
  py::list events;
  for (const auto& e : tr.events) events.append(py::make_tuple(e.t, e.kind, e.detail));
  d["events"] = events;
  return d;
}

}  // namespace

PYBIND11_MODULE(_homctl, m) {
  m.doc() = "homogeneous prescribed-time controllers for linear plants";

  // Leaked on purpose: the handle must outlive interpreter shutdown.
  error_type = (new py::exception<Error>(m, "HomctlError"))->ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(error_type, (std::string(to_string(e.kind())) + ": " + e.what()).c_str());
    }
  });

  py::class_<LinearPlant>(m, "Plant")
      .def(py::init([](const Matrix& A, const Matrix& B, double delay) {
             LinearPlant p{A, B, delay};
             p.validate();
             return p;
           }),
           py::arg("A"), py::arg("B"), py::arg("delay") = 0.0)
      .def_readwrite("A", &LinearPlant::A)
      .def_readwrite("B", &LinearPlant::B)
      .def_readwrite("delay", &LinearPlant::delay)
      .def("is_controllable", [](const LinearPlant& p) { return p.is_controllable(); })
      .def_static("from_file", [](const std::filesystem::path& path) { return load_plant_file(path); });

  py::class_<SynthesizedController>(m, "Controller")
      .def_readonly("T", &SynthesizedController::T)
      .def_readonly("mu", &SynthesizedController::mu)
      .def_readonly("G0", &SynthesizedController::G0)
      .def_readonly("Y0", &SynthesizedController::Y0)
      .def_readonly("Gd", &SynthesizedController::Gd)
      .def_readonly("A0", &SynthesizedController::A0)
      .def_readonly("X", &SynthesizedController::X)
      .def_readonly("Y", &SynthesizedController::Y)
      .def_readonly("K0", &SynthesizedController::K0)
      .def_readonly("K", &SynthesizedController::K)
      .def_property_readonly("P", &SynthesizedController::weight)
      .def("to_json", &controller_to_json)
      .def_static("from_json", &controller_from_json)
      .def_static("from_gains",
                  [](const LinearPlant& p, const Matrix& K0, const Matrix& Gd, const Matrix& K, const Matrix& X,
                     double T) { return assemble_controller(p, K0, Gd, K, X, T); },
                  py::arg("plant"), py::arg("K0"), py::arg("Gd"), py::arg("K"), py::arg("X"), py::arg("T") = 1.0);

  py::class_<VerificationReport>(m, "VerificationReport")
      .def_property_readonly("passed", &VerificationReport::all_passed)
      .def_property_readonly("checks",
                             [](const VerificationReport& r) {
                               py::dict d;
                               for (const auto& c : r.checks) {
                                 d[py::str(c.name)] = py::make_tuple(c.value, c.threshold, c.passed);
                               }
                               return d;
                             })
      .def("__str__", &format_report);

  m.def("harmonic_oscillator", &harmonic_oscillator, py::arg("delay") = 0.0);
  m.def("oscillator_reference_controller", &oscillator_reference_controller, py::arg("T") = 1.0);
  m.def(
      "synthesize",
      [](const LinearPlant& p, double T) {
        SynthesisConfig cfg;
        cfg.T = T;
        return synthesize(p, cfg);
      },
      py::arg("plant"), py::arg("T") = 1.0);
  m.def("verify", &verify, py::arg("controller"), py::arg("plant"));

  m.def(
      "hom_norm", [](const Matrix& Gd, const Matrix& P, const Vector& x) { return hom_norm(Dilation(Gd, P), x); },
      py::arg("Gd"), py::arg("P"), py::arg("x"));
  m.def(
      "control",
      [](const SynthesizedController& c, const Vector& x0, const Vector& x, const std::string& kind) {
        return ControlContext(c, kind_from(kind), x0).eval_control(x);
      },
      py::arg("controller"), py::arg("x0"), py::arg("x"), py::arg("kind") = "prescribed_time_robust");
  m.def(
      "disturbance_bound",
      [](const SynthesizedController& c, double x0_norm, double rho, const std::string& kind) {
        return disturbance_bound(c, x0_norm, rho, kind_from(kind));
      },
      py::arg("controller"), py::arg("x0_norm"), py::arg("rho") = 2.0, py::arg("kind") = "prescribed_time_robust");

  py::class_<ScenarioConfig>(m, "Scenario")
      .def(py::init([](const LinearPlant& plant, const SynthesizedController& controller, const Vector& x0,
                       const std::string& kind, double h, double t_end, std::optional<std::pair<double, double>> sinusoid,
                       std::optional<Vector> constant, double noise, std::uint64_t seed, std::vector<Vector> phi,
                       bool snap) {
             ScenarioConfig cfg;
             cfg.plant = plant;
             cfg.controller = controller;
             cfg.x0 = x0;
             cfg.kind = kind_from(kind);
             cfg.h = h;
             cfg.t_end = t_end;
             if (sinusoid && constant) throw Error(ErrorKind::config, "give either sinusoid or constant");
             if (sinusoid) cfg.disturbance = MatchedSinusoid{sinusoid->first, sinusoid->second};
             if (constant) cfg.disturbance = ConstantDisturbance{*constant};
             cfg.noise = {noise, seed};
             cfg.phi = std::move(phi);
             cfg.snap_enabled = snap;
             cfg.validate();
             return cfg;
           }),
           py::arg("plant"), py::arg("controller"), py::arg("x0"), py::arg("kind") = "prescribed_time_robust",
           py::arg("h") = 0.01, py::arg("t_end") = 2.0, py::arg("sinusoid") = py::none(),
           py::arg("constant") = py::none(), py::arg("noise") = 0.0, py::arg("seed") = 0,
           py::arg("phi") = std::vector<Vector>{}, py::arg("snap") = true)
      .def_readonly("x0", &ScenarioConfig::x0)
      .def_readonly("h", &ScenarioConfig::h)
      .def_readonly("t_end", &ScenarioConfig::t_end)
      .def_readonly("plant", &ScenarioConfig::plant)
      .def_readonly("controller", &ScenarioConfig::controller)
      .def_property_readonly("kind", [](const ScenarioConfig& c) { return std::string(to_string(c.kind)); });

  m.def(
      "load_scenario", [](const std::filesystem::path& path) { return load_scenario_file(path).config; },
      py::arg("path"));
  m.def(
      "simulate",
      [](const ScenarioConfig& cfg) {
        SimulationTrace tr;
        {
          py::gil_scoped_release release;
          tr = simulate(cfg);
        }
        return trace_dict(tr);
      },
      py::arg("scenario"));
  m.def(
      "simulate_dense",
      [](const ScenarioConfig& cfg, double stop_reading) {
        SimulationTrace tr;
        {
          py::gil_scoped_release release;
          tr = simulate_dense(cfg, stop_reading);
        }
        return trace_dict(tr);
      },
      py::arg("scenario"), py::arg("stop_reading") = 0.02);
  m.def(
      "run_suite",
      [](const std::string& name, const std::filesystem::path& out_dir, unsigned workers,
         std::optional<std::uint64_t> seed) {
        SuiteReport rep;
        {
          py::gil_scoped_release release;
          rep = run_suite(name, out_dir, workers, seed);
        }
        py::list rows;
        for (const auto& r : rep.rows) {
          py::dict d;
          d["scenario"] = r.name;
          d["settling_time"] = r.settling_time ? py::cast(*r.settling_time) : py::none();
          d["max_norm"] = r.max_norm;
          d["residual"] = r.residual;
          d["passed"] = r.passed;
          d["error"] = r.error;
          rows.append(d);
        }
        return rows;
      },
      py::arg("suite"), py::arg("out_dir"), py::arg("workers") = 1, py::arg("seed") = py::none());
}
