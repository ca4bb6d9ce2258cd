#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fluidq/excursion_laws.hpp"
#include "fluidq/levy_model.hpp"
#include "fluidq/mc_oracle.hpp"
#include "fluidq/scale_fn.hpp"
#include "fluidq/special_fns.hpp"
#include "fluidq/validation.hpp"
#include "fluidq/version.hpp"

namespace py = pybind11;
using namespace fluidq;

namespace {

py::dict stats_to_dict(const CycleStats& stats) {
  const auto n = static_cast<py::ssize_t>(stats.samples.size());
  const py::array::ShapeContainer shape{n};
  py::array_t<double> b(shape), i(shape), q(shape);
  auto bb = b.mutable_unchecked<1>();
  auto ii = i.mutable_unchecked<1>();
  auto qq = q.mutable_unchecked<1>();
  for (py::ssize_t k = 0; k < n; ++k) {
    bb(k) = stats.samples[k].b;
    ii(k) = stats.samples[k].i;
    qq(k) = stats.samples[k].q_star;
  }
  py::dict d;
  d["b"] = b;
  d["i"] = i;
  d["q_star"] = q;
  d["censored"] = stats.censored;
  d["mean_b"] = stats.mean_b();
  d["se_b"] = stats.se_b();
  d["mean_i"] = stats.mean_i();
  d["se_i"] = stats.se_i();
  d["jump_rate"] = stats.jump_rate;
  d["compensated_drift"] = stats.compensated_drift;
  return d;
}

}  // namespace

PYBIND11_MODULE(_fluidq, m) {
  m.doc() = "Excursion laws of stochastic fluid queues fed by local-time processes";
  m.attr("__version__") = kVersion;

  py::class_<LevyModel>(m, "LevyModel")
      .def_static("brownian", &LevyModel::brownian, py::arg("c"))
      .def_static("tempered_stable", &LevyModel::tempered_stable, py::arg("phi"),
                  py::arg("gamma"), py::arg("nu"))
      .def_static(
          "custom",
          [](std::function<double(double)> psi, double drift) {
            return LevyModel::custom(std::move(psi), drift);
          },
          py::arg("psi"), py::arg("drift"))
      .def_property_readonly("drift", &LevyModel::drift)
      .def("describe", &LevyModel::describe)
      .def("__repr__", [](const LevyModel& self) { return "LevyModel(" + self.describe() + ")"; });

  m.def("psi", [](const LevyModel& mo, double t) { return psi(mo, t); }, py::arg("model"),
        py::arg("theta"));
  m.def("psi_prime", [](const LevyModel& mo, double t) { return psi_prime(mo, t); },
        py::arg("model"), py::arg("theta"));
  m.def("phi_inverse", [](const LevyModel& mo, double q) { return phi_inverse(mo, q); },
        py::arg("model"), py::arg("q"));
  m.def("validate", [](const LevyModel& mo) { return validate(mo); }, py::arg("model"));

  m.def("erfc", &fluidq::erfc);
  m.def("erfcx", &fluidq::erfcx);
  m.def("mittag_leffler", &mittag_leffler, py::arg("alpha"), py::arg("beta"), py::arg("z"));

  py::enum_<ScaleEngine>(m, "ScaleEngine")
      .value("ClosedFormBrownian", ScaleEngine::ClosedFormBrownian)
      .value("MittagLefflerTS", ScaleEngine::MittagLefflerTS)
      .value("NumericInversion", ScaleEngine::NumericInversion);

  py::class_<ScaleFunction>(m, "ScaleFunction")
      .def(py::init([](const LevyModel& mo, double q) { return ScaleFunction::make(mo, q); }),
           py::arg("model"), py::arg("q") = 0.0)
      .def(py::init([](const LevyModel& mo, double q, ScaleEngine engine) {
             return ScaleFunction(mo, q, engine);
           }),
           py::arg("model"), py::arg("q"), py::arg("engine"))
      .def("__call__", &ScaleFunction::operator(), py::arg("x"))
      .def("tilted_value", &ScaleFunction::tilted_value, py::arg("x"))
      .def("integral", &ScaleFunction::integral, py::arg("x"))
      .def("exp_weighted_integral", &ScaleFunction::exp_weighted_integral, py::arg("beta"),
           py::arg("x"))
      .def_property_readonly("q", &ScaleFunction::q)
      .def_property_readonly("phi_q", &ScaleFunction::phi_q);

  m.def("w_brownian", &w_brownian, py::arg("x"), py::arg("alpha"), py::arg("c"));
  m.def("w_tempered_stable",
        [](double x, double phi, double gamma, double nu) {
          return w_tempered_stable(x, TemperedStableParams{phi, gamma, nu});
        },
        py::arg("x"), py::arg("phi"), py::arg("gamma"), py::arg("nu"));
  m.def("w_tilted", &w_tilted, py::arg("x"), py::arg("alpha"), py::arg("beta"),
        py::arg("model"));
  m.def("z_tilted", &z_tilted, py::arg("x"), py::arg("q"), py::arg("beta"), py::arg("model"));
  m.def("w_alpha_derivative_at_zero", &w_alpha_derivative_at_zero, py::arg("x"),
        py::arg("model"));

  m.def("triple_law", &triple_law, py::arg("alpha"), py::arg("beta"), py::arg("x"),
        py::arg("model"));
  m.def("joint_bi_transform", &joint_bi_transform, py::arg("alpha"), py::arg("beta"),
        py::arg("model"));
  m.def("busy_transform", &busy_transform, py::arg("alpha"), py::arg("model"));
  m.def("idle_transform", &idle_transform, py::arg("beta"), py::arg("model"));
  m.def("busy_mean", &busy_mean, py::arg("model"));
  m.def("idle_mean", &idle_mean, py::arg("model"));
  m.def("cycle_mean", &cycle_mean, py::arg("model"));
  m.def("cycle_rate", &cycle_rate, py::arg("model"));
  m.def("qstar_cdf", &qstar_cdf, py::arg("x"), py::arg("model"));
  m.def("qstar_tail_asymptote", &qstar_tail_asymptote, py::arg("x"), py::arg("model"));
  m.def("idle_endpoints_transform", &idle_endpoints_transform, py::arg("alpha"),
        py::arg("beta"), py::arg("model"));
  m.def("busy_endpoints_max_transform", &busy_endpoints_max_transform, py::arg("alpha"),
        py::arg("beta"), py::arg("x"), py::arg("model"));
  m.def("busy_endpoints_transform", &busy_endpoints_transform, py::arg("alpha"),
        py::arg("beta"), py::arg("model"));
  m.def("qstar_conditional_cdf", &qstar_conditional_cdf, py::arg("x"), py::arg("model"));

  py::enum_<BrownianDensityKind>(m, "BrownianDensityKind")
      .value("BusyLength", BrownianDensityKind::BusyLength)
      .value("G1", BrownianDensityKind::G1)
      .value("D0Idle", BrownianDensityKind::D0Idle)
      .value("JointD0G1", BrownianDensityKind::JointD0G1);

  m.def("brownian_density", &brownian_density, py::arg("which"), py::arg("x"), py::arg("c"));
  m.def("brownian_joint_density_d0_g1", &brownian_joint_density_d0_g1, py::arg("x"),
        py::arg("y"), py::arg("c"));
  m.def("brownian_observed_busy_mean", &brownian_observed_busy_mean, py::arg("c"));
  m.def("brownian_palm_endpoint_transform", &brownian_palm_endpoint_transform,
        py::arg("theta"), py::arg("beta"), py::arg("a"));

  m.def(
      "simulate",
      [](const LevyModel& model, std::uint64_t n_cycles, double epsilon, std::uint64_t seed,
         int workers) {
        SimConfig cfg;
        cfg.model = model;
        cfg.n_cycles = n_cycles;
        cfg.epsilon = epsilon;
        cfg.seed = seed;
        cfg.workers = workers;
        CycleStats stats;
        {
          py::gil_scoped_release release;
          stats = simulate_cycles(cfg);
        }
        return stats_to_dict(stats);
      },
      py::arg("model"), py::arg("n_cycles") = 100000, py::arg("epsilon") = 1e-6,
      py::arg("seed") = 1, py::arg("workers") = 1);

  m.def(
      "run_validation",
      [](const LevyModel& model, std::uint64_t n_cycles, double epsilon, std::uint64_t seed,
         int workers) {
        SimConfig cfg;
        cfg.model = model;
        cfg.n_cycles = n_cycles;
        cfg.epsilon = epsilon;
        cfg.seed = seed;
        cfg.workers = workers;
        ValidationReport rep;
        {
          py::gil_scoped_release release;
          rep = run_validation(cfg);
        }
        py::dict d;
        d["overall_pass"] = rep.overall_pass();
        d["json"] = rep.to_json();
        py::list checks;
        for (const auto& c : rep.checks) {
          py::dict cd;
          cd["name"] = c.name;
          cd["analytic"] = c.analytic;
          cd["estimate"] = c.estimate;
          cd["tolerance"] = c.tolerance;
          cd["pass"] = c.pass;
          checks.append(cd);
        }
        d["checks"] = checks;
        return d;
      },
      py::arg("model"), py::arg("n_cycles") = 0, py::arg("epsilon") = 1e-6,
      py::arg("seed") = 1, py::arg("workers") = 1);
}
