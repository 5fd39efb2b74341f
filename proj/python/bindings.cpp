#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nash/config.hpp"
#include "nash/error.hpp"
#include "nash/experiments.hpp"
#include "nash/version.hpp"

namespace py = pybind11;
using namespace nash;

namespace {

ResponseOracle oracle_for(const NashSystem& sys, const RunConfig& cfg) {
  return ResponseOracle::from_system(std::make_shared<NashSystem>(sys), cfg.flow());
}

struct PyRealization {
  LocalRealization red;
  std::shared_ptr<const NashSystem> base;
};

struct PyIsomorphism {
  LocalIsomorphism iso;
  NashSystem sys1;
  NashSystem sys2;
};

std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

Vec to_vec(const std::vector<double>& v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Realization theory for Nash (power-law) control systems";
  m.attr("__version__") = kVersion;

  static auto* nash_error = new py::exception<Error>(m, "NashError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object type = py::reinterpret_borrow<py::object>(nash_error->ptr());
      py::object exc = type(e.what());
      exc.attr("code") = std::string(error_name(e.code()));
      PyErr_SetObject(type.ptr(), exc.ptr());
    }
  });

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_readwrite("seed", &RunConfig::seed)
      .def_readwrite("flow_tol", &RunConfig::flow_tol)
      .def_readwrite("rank_tol", &RunConfig::rank_tol)
      .def_readwrite("fit_tol", &RunConfig::fit_tol)
      .def_readwrite("newton_tol", &RunConfig::newton_tol)
      .def_readwrite("iso_tol", &RunConfig::iso_tol)
      .def_readwrite("derivative_floor", &RunConfig::derivative_floor)
      .def_readwrite("depth", &RunConfig::depth)
      .def_readwrite("degree_bound", &RunConfig::degree_bound)
      .def_readwrite("epsilon", &RunConfig::epsilon)
      .def_readwrite("trials", &RunConfig::trials)
      .def_readwrite("budget", &RunConfig::budget)
      .def("validate", &RunConfig::validate)
      .def("to_json", [](const RunConfig& c) { return c.to_json().dump(); });

  py::class_<NashSystem>(m, "System")
      .def_property_readonly("dim", &NashSystem::dim)
      .def_property_readonly("letters", [](const NashSystem& s) { return s.alphabet().names(); })
      .def_property_readonly("x0", [](const NashSystem& s) { return to_std(s.x0()); })
      .def("to_json", [](const NashSystem& s, const std::string& name) { return system_to_json(s, name).dump(); },
           py::arg("name") = "");

  m.def("load_system", &load_system, py::arg("path"));
  m.def("system_from_json", [](const std::string& text) { return system_from_json(Json::parse(text)); });

  m.def(
      "simulate",
      [](const NashSystem& sys, const std::string& word, const RunConfig& cfg) {
        GeneralizedInput u = word_from_json(sys.alphabet(), Json::parse(word));
        return trajectory_to_json(sys, u, flow(sys, sys.x0(), u, cfg.flow())).dump();
      },
      py::arg("system"), py::arg("word"), py::arg("config") = RunConfig{});

  m.def(
      "response_trdeg",
      [](const NashSystem& sys, const RunConfig& cfg) {
        return report_to_json(estimate_response_trdeg(oracle_for(sys, cfg), cfg.response())).dump();
      },
      py::arg("system"), py::arg("config") = RunConfig{});
  m.def(
      "reachable_trdeg",
      [](const NashSystem& sys, const RunConfig& cfg) {
        return report_to_json(estimate_reachable_trdeg(sys, cfg.reach())).dump();
      },
      py::arg("system"), py::arg("config") = RunConfig{});
  m.def(
      "obs_trdeg",
      [](const NashSystem& sys, std::size_t depth, const RunConfig& cfg) {
        return report_to_json(estimate_obs_trdeg(sys, depth, cfg.trdeg())).dump();
      },
      py::arg("system"), py::arg("depth"), py::arg("config") = RunConfig{});

  py::class_<PyRealization>(m, "Realization")
      .def_property_readonly("dim", [](const PyRealization& r) { return r.red.dim(); })
      .def_property_readonly("shift_time", [](const PyRealization& r) { return r.red.shift().total_time(); })
      .def_property_readonly("provenance", [](const PyRealization& r) { return provenance_name(r.red.provenance()); })
      .def("to_json", [](const PyRealization& r) { return realization_to_json(r.red).dump(); })
      .def(
          "respond",
          [](const PyRealization& r, const std::string& word, const RunConfig& cfg) {
            GeneralizedInput u = word_from_json(r.red.alphabet(), Json::parse(word));
            Trajectory t = flow(r.red, r.red.initial_state(), u, cfg.flow());
            return to_std(r.red.readout(t.terminal));
          },
          py::arg("word"), py::arg("config") = RunConfig{})
      .def(
          "verify",
          [](const PyRealization& r, const RunConfig& cfg) {
            auto rep = verify_local_realization(r.red, oracle_for(*r.base, cfg), cfg.verify());
            return verification_to_json(r.red.alphabet(), rep).dump();
          },
          py::arg("config") = RunConfig{});

  auto reducer = [](int which) {
    return [which](const NashSystem& sys, const RunConfig& cfg, bool restrict_reach) {
      auto base = std::make_shared<NashSystem>(sys);
      auto o = ResponseOracle::from_system(base, cfg.flow());
      ReductionOptions opts = cfg.reduction();
      opts.restrict_to_reachable = restrict_reach;
      if (which == 0) return PyRealization{reachability_reduce(sys, o, cfg.epsilon, opts), base};
      if (which == 1) return PyRealization{observability_reduce(sys, o, cfg.epsilon, opts), base};
      return PyRealization{minimize(sys, o, cfg.epsilon, opts), base};
    };
  };
  m.def("reachability_reduce", reducer(0), py::arg("system"), py::arg("config") = RunConfig{},
        py::arg("restrict_to_reachable") = false);
  m.def("observability_reduce", reducer(1), py::arg("system"), py::arg("config") = RunConfig{},
        py::arg("restrict_to_reachable") = false);
  m.def("minimize", reducer(2), py::arg("system"), py::arg("config") = RunConfig{},
        py::arg("restrict_to_reachable") = false);

  m.def(
      "check_minimality",
      [](const NashSystem& sys, const RunConfig& cfg) {
        return verdict_to_json(check_minimality(sys, oracle_for(sys, cfg), cfg.minimality())).dump();
      },
      py::arg("system"), py::arg("config") = RunConfig{});

  py::class_<PyIsomorphism>(m, "Isomorphism")
      .def_property_readonly("dim", [](const PyIsomorphism& i) { return i.iso.dim(); })
      .def_property_readonly("radius", [](const PyIsomorphism& i) { return i.iso.radius; })
      .def("apply", [](const PyIsomorphism& i, const std::vector<double>& x) { return to_std(i.iso.apply(to_vec(x))); })
      .def("inverse",
           [](const PyIsomorphism& i, const std::vector<double>& z) { return to_std(i.iso.inverse(to_vec(z))); })
      .def("to_json", [](const PyIsomorphism& i) { return isomorphism_to_json(i.sys1.alphabet(), i.iso).dump(); })
      .def(
          "verify",
          [](const PyIsomorphism& i, const RunConfig& cfg) {
            return iso_report_to_json(verify_isomorphism(i.iso, i.sys1, i.sys2, cfg.iso_verify())).dump();
          },
          py::arg("config") = RunConfig{});

  m.def(
      "construct_isomorphism",
      [](const NashSystem& s1, const NashSystem& s2, const RunConfig& cfg) {
        auto iso = construct_isomorphism(s1, s2, oracle_for(s1, cfg), cfg.epsilon, cfg.isomorphism());
        return PyIsomorphism{std::move(iso), s1, s2};
      },
      py::arg("system1"), py::arg("system2"), py::arg("config") = RunConfig{});

  m.def("experiment_ids", &experiment_ids);
  m.def(
      "run_experiment",
      [](const std::string& id, const std::string& catalog, const RunConfig& cfg) {
        py::gil_scoped_release release;
        return experiment_to_json(run_experiment(id, catalog, cfg)).dump();
      },
      py::arg("id"), py::arg("catalog"), py::arg("config") = RunConfig{});
}
