#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "wcrisk/certificates.hpp"
#include "wcrisk/config.hpp"
#include "wcrisk/error.hpp"
#include "wcrisk/experiment.hpp"
#include "wcrisk/linalg.hpp"
#include "wcrisk/risk.hpp"
#include "wcrisk/simulation.hpp"
#include "wcrisk/triggers.hpp"

namespace py = pybind11;
using namespace wcrisk;

namespace {

using Rows = std::vector<std::vector<double>>;

Matrix to_matrix(const Rows& rows) { return Matrix::from_rows(rows); }

py::object json_to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

}  // namespace

PYBIND11_MODULE(_wcrisk, m) {
  m.doc() = "Worst-case CVaR certificates and event-triggered control experiments";

  static py::exception<Error> error_type(m, "WcriskError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const std::string msg = std::string(to_string(e.kind())) + ": " + e.what();
      PyErr_SetString(error_type.ptr(), msg.c_str());
    }
  });

  // linalg
  m.def("spectral_norm", [](const Rows& a) { return spectral_norm(to_matrix(a)); }, py::arg("m"));
  m.def("kron", [](const Rows& x, const Rows& y) { return kron(to_matrix(x), to_matrix(y)).to_rows(); },
        py::arg("x"), py::arg("y"));
  m.def(
      "solve_discrete_lyapunov",
      [](const Rows& a, const Rows& q, const std::string& method) {
        LyapunovMethod lm = LyapunovMethod::automatic;
        if (method == "vectorized") lm = LyapunovMethod::vectorized;
        else if (method == "doubling") lm = LyapunovMethod::doubling;
        else if (method != "automatic") throw Error(ErrorKind::invalid_input, "unknown method " + method);
        return solve_discrete_lyapunov(to_matrix(a), to_matrix(q), lm).to_rows();
      },
      py::arg("a"), py::arg("q"), py::arg("method") = "automatic");
  m.def("reachability_rank", [](const Rows& a, const Rows& e) {
    return reachability_rank(to_matrix(a), to_matrix(e));
  }, py::arg("a"), py::arg("e"));

  // risk
  m.def(
      "worst_case_cvar_bounds",
      [](const Rows& covariance, double level, const Rows& a, std::optional<Vector> b, double c) {
        const auto mat = to_matrix(a);
        QuadraticLoss loss{mat, b.value_or(Vector(mat.rows(), 0.0)), c};
        const auto bounds = worst_case_cvar_bounds(MomentAmbiguitySet(to_matrix(covariance), level), loss);
        py::dict d;
        d["lower"] = bounds.lower;
        d["upper"] = bounds.upper;
        d["exact"] = bounds.exact ? py::cast(*bounds.exact) : py::none();
        return d;
      },
      py::arg("covariance"), py::arg("level"), py::arg("a"), py::arg("b") = py::none(),
      py::arg("c") = 0.0);
  m.def("worst_case_cvar_augmented",
        [](const Rows& covariance, double level, std::size_t horizon, const Rows& a) {
          return worst_case_cvar_augmented(MomentAmbiguitySet(to_matrix(covariance), level), horizon,
                                           to_matrix(a));
        },
        py::arg("covariance"), py::arg("level"), py::arg("horizon"), py::arg("a"));
  m.def("empirical_cvar", [](const std::vector<double>& s, double level) { return empirical_cvar(s, level); },
        py::arg("samples"), py::arg("level"));

  // certificates
  py::class_<RiskCertificate>(m, "RiskCertificate")
      .def_property_readonly("kind", [](const RiskCertificate& c) { return std::string(to_string(c.kind)); })
      .def_readonly("radius", &RiskCertificate::radius)
      .def_readonly("threshold", &RiskCertificate::threshold_value)
      .def_readonly("margin", &RiskCertificate::margin)
      .def_readonly("satisfied", &RiskCertificate::satisfied)
      .def_readonly("alpha1", &RiskCertificate::alpha1)
      .def_readonly("alpha2", &RiskCertificate::alpha2)
      .def_readonly("settling_time", &RiskCertificate::settling_time)
      .def("__repr__", [](const RiskCertificate& c) {
        return "<RiskCertificate " + std::string(to_string(c.kind)) +
               (c.satisfied ? " satisfied" : " not satisfied") + ">";
      });

  py::class_<ClosedLoopSystem>(m, "ClosedLoopSystem")
      .def(py::init([](const Rows& a, const Rows& b, const Rows& e, const Rows& k, const Rows& sigma_w,
                       double epsilon) {
             return ClosedLoopSystem(to_matrix(a), to_matrix(b), to_matrix(e), to_matrix(k),
                                     MomentAmbiguitySet(to_matrix(sigma_w), epsilon));
           }),
           py::arg("a"), py::arg("b"), py::arg("e"), py::arg("k"), py::arg("sigma_w"), py::arg("epsilon"))
      .def_property_readonly("closed_loop_norm", &ClosedLoopSystem::closed_loop_norm)
      .def_property_readonly("b_norm", &ClosedLoopSystem::b_norm)
      .def_property_readonly("bk_norm", &ClosedLoopSystem::bk_norm)
      .def_property_readonly("risk_trace", [](const ClosedLoopSystem& cl) { return cl.autonomous().risk_trace(); })
      .def_property_readonly("noise_risk", [](const ClosedLoopSystem& cl) { return cl.autonomous().noise_risk(); })
      .def("sigma_max", [](const ClosedLoopSystem& cl, int corollary, double r) { return sigma_max(cl, corollary, r); },
           py::arg("corollary"), py::arg("radius"))
      .def("ultimate_bound_certificate",
           [](const ClosedLoopSystem& cl, double r) { return ultimate_bound_certificate(cl.autonomous(), r); },
           py::arg("radius"))
      .def("invariance_certificate",
           [](const ClosedLoopSystem& cl, double r) { return invariance_certificate(cl.autonomous(), r); },
           py::arg("radius"))
      .def("robust_ultimate_bound_certificate",
           [](const ClosedLoopSystem& cl, double r, double bound) {
             return robust_ultimate_bound_certificate(cl.with_state_error(bound), r);
           },
           py::arg("radius"), py::arg("state_error_bound"))
      .def("robust_invariance_certificate",
           [](const ClosedLoopSystem& cl, double r, double bound) {
             return robust_invariance_certificate(cl.with_state_error(bound), r);
           },
           py::arg("radius"), py::arg("state_error_bound"));

  m.def("should_trigger",
        [](const std::string& kind, double sigma, const Vector& x, const Vector& held, std::optional<Rows> k) {
          return should_trigger(TriggerPolicy(parse_trigger_kind(kind), sigma, k ? to_matrix(*k) : Matrix{}),
                                x, held);
        },
        py::arg("kind"), py::arg("sigma"), py::arg("current_state"), py::arg("held_state"),
        py::arg("gain_k") = py::none());

  // simulation, driven by the same config format as the CLI
  m.def("reference_config", [] { return cli::serialize(cli::reference_example()); });
  m.def("certify", [](const std::string& config) { return json_to_py(cli::certify_report(cli::parse_config(config))); },
        py::arg("config"));
  m.def(
      "simulate_ensemble",
      [](const std::string& config_text, std::optional<double> sigma, bool periodic) {
        const auto config = cli::parse_config(config_text);
        const auto cl = cli::build_system(config);
        Controller controller = Controller::periodic();
        if (!periodic) {
          auto cfg = config;
          if (sigma) cfg.trigger.sigma = sigma;
          controller = Controller::event_triggered(cli::resolve_trigger(cfg, cl));
        }
        EnsembleOptions opts;
        opts.runs = config.runs;
        opts.level = config.epsilon;
        opts.workers = config.workers;
        const DisturbanceSampler sampler(config.sampler, config.sigma_w, config.seed, config.dof);
        RiskSummary s;
        {
          py::gil_scoped_release release;
          s = ensemble(Plant::from(cl), controller, config.x0, config.horizon, sampler, opts);
        }
        py::dict d;
        d["cvar"] = s.cvar;
        d["cvar_stderr"] = s.cvar_stderr;
        d["mean"] = s.mean;
        d["max"] = s.max;
        d["update_counts"] = s.update_counts;
        d["update_mean"] = s.update_mean;
        return d;
      },
      py::arg("config"), py::arg("sigma") = py::none(), py::arg("periodic") = false);
}
