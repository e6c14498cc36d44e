#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>

#include "seqrd/boundary.hpp"
#include "seqrd/model.hpp"
#include "seqrd/onestep.hpp"
#include "seqrd/oracle.hpp"
#include "seqrd/planner.hpp"

namespace py = pybind11;
using namespace seqrd;

namespace {

std::string repr(const Multipliers& m) {
  return "Multipliers(gamma_c=" + std::to_string(m.gamma_c) + ", gamma_m=" + std::to_string(m.gamma_m) +
         ", gamma_s=" + std::to_string(m.gamma_s) + ")";
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bounded planning in passive POMDPs";

  py::class_<ModelSpec>(m, "ModelSpec")
      .def(py::init<>())
      .def_readwrite("num_world", &ModelSpec::num_world)
      .def_readwrite("num_obs", &ModelSpec::num_obs)
      .def_readwrite("num_mem", &ModelSpec::num_mem)
      .def_readwrite("horizon", &ModelSpec::horizon)
      .def_readwrite("init_world", &ModelSpec::init_world)
      .def_readwrite("init_mem", &ModelSpec::init_mem)
      .def_readwrite("trans", &ModelSpec::trans)
      .def_readwrite("obs", &ModelSpec::obs)
      .def_readwrite("cost", &ModelSpec::cost);

  py::class_<Multipliers>(m, "Multipliers")
      .def(py::init<>())
      .def(py::init([](double c, double mm, double s) { return Multipliers{c, mm, s}; }), py::arg("gamma_c") = 0.0,
           py::arg("gamma_m") = 0.0, py::arg("gamma_s") = 0.0)
      .def_readwrite("gamma_c", &Multipliers::gamma_c)
      .def_readwrite("gamma_m", &Multipliers::gamma_m)
      .def_readwrite("gamma_s", &Multipliers::gamma_s)
      .def_property_readonly("gamma", &Multipliers::gamma)
      .def("__eq__", [](const Multipliers& a, const Multipliers& b) { return a == b; })
      .def("__repr__", &repr);

  py::class_<JointBelief>(m, "JointBelief")
      .def(py::init([](const Matrix& table) { return JointBelief{table}; }), py::arg("table"))
      .def_readwrite("table", &JointBelief::table);

  py::class_<StepPolicy>(m, "StepPolicy")
      .def(py::init<int, int>(), py::arg("num_mem"), py::arg("num_obs"))
      .def_static("uniform", &StepPolicy::uniform, py::arg("num_mem"), py::arg("num_obs"))
      .def_readwrite("num_obs", &StepPolicy::num_obs)
      .def_readwrite("table", &StepPolicy::table)
      .def("__call__", [](const StepPolicy& q, int mp, int o, int mn) { return q(mp, o, mn); });

  py::class_<StepReport>(m, "StepReport")
      .def_readonly("distortion", &StepReport::distortion)
      .def_readonly("i_c", &StepReport::i_c)
      .def_readonly("i_m", &StepReport::i_m)
      .def_readonly("i_s", &StepReport::i_s)
      .def_readonly("entropy_q", &StepReport::entropy_q)
      .def_readonly("lagrangian", &StepReport::lagrangian);

  py::class_<OneStepSolution>(m, "OneStepSolution")
      .def_readonly("policy", &OneStepSolution::policy)
      .def_readonly("report", &OneStepSolution::report)
      .def_readonly("iterations", &OneStepSolution::iterations)
      .def_readonly("converged", &OneStepSolution::converged)
      .def_readonly("lagrangian_trace", &OneStepSolution::lagrangian_trace);

  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("beliefs", &Trajectory::beliefs)
      .def_readonly("policies", &Trajectory::policies)
      .def_readonly("reports", &Trajectory::reports)
      .def_readonly("total_cost", &Trajectory::total_cost)
      .def_readonly("distortion", &Trajectory::distortion)
      .def_readonly("i_c", &Trajectory::i_c)
      .def_readonly("i_m", &Trajectory::i_m)
      .def_readonly("i_s", &Trajectory::i_s)
      .def_readonly("iterations", &Trajectory::iterations)
      .def_readonly("converged", &Trajectory::converged)
      .def_readonly("cost_trace", &Trajectory::cost_trace);

  py::class_<BoundaryPoint>(m, "BoundaryPoint")
      .def_readonly("mult", &BoundaryPoint::mult)
      .def_readonly("r_m", &BoundaryPoint::r_m)
      .def_readonly("r_s", &BoundaryPoint::r_s)
      .def_readonly("i_c", &BoundaryPoint::i_c)
      .def_readonly("i_m", &BoundaryPoint::i_m)
      .def_readonly("i_s", &BoundaryPoint::i_s)
      .def_readonly("distortion", &BoundaryPoint::distortion)
      .def_readonly("lagrangian", &BoundaryPoint::lagrangian)
      .def_property_readonly("regime",
                             [](const BoundaryPoint& p) -> std::optional<std::string> {
                               if (!p.regime) return std::nullopt;
                               return std::string(regime_name(*p.regime));
                             })
      .def_readonly("slope_m", &BoundaryPoint::slope_m)
      .def_readonly("slope_s", &BoundaryPoint::slope_s)
      .def_readonly("converged", &BoundaryPoint::converged)
      .def_readonly("iterations", &BoundaryPoint::iterations);

  m.def("validate", &validate, py::arg("spec"));
  m.def("build_symmetric_channel", &build_symmetric_channel);
  m.def("build_kelly", &build_kelly);
  m.def("load_model", [](const std::string& path) { return load_model(path); }, py::arg("path"));
  m.def("save_model", [](const ModelSpec& spec, const std::string& path) { save_model(spec, path); },
        py::arg("spec"), py::arg("path"));
  m.def("initial_belief", &initial_belief, py::arg("spec"));

  m.def(
      "solve_last_step",
      [](const JointBelief& theta, const ModelSpec& spec, const Multipliers& mult, double tol, int max_iters,
         std::uint64_t seed) {
        SolveOptions opts;
        opts.tol = tol;
        opts.max_iters = max_iters;
        opts.init = RandomDirichletInit{seed, 1.0};
        return solve_last_step(theta, spec, mult, opts);
      },
      py::arg("theta"), py::arg("spec"), py::arg("mult"), py::arg("tol") = 1e-9, py::arg("max_iters") = 10000,
      py::arg("seed") = 0);

  m.def("evaluate_policy", &evaluate_policy, py::arg("spec"), py::arg("policy"), py::arg("mult"));

  m.def(
      "plan",
      [](const ModelSpec& spec, const Multipliers& mult, double tol_inner, double tol_outer, std::uint64_t seed,
         std::optional<Policy> init) {
        PlanOptions opts;
        opts.inner.tol = tol_inner;
        opts.outer_tol = tol_outer;
        opts.seed = seed;
        py::gil_scoped_release release;
        return plan(spec, mult, opts, init);
      },
      py::arg("spec"), py::arg("mult"), py::arg("tol_inner") = 1e-9, py::arg("tol_outer") = 1e-7,
      py::arg("seed") = 0, py::arg("init") = py::none());

  m.def(
      "sweep",
      [](const ModelSpec& spec, const std::vector<Multipliers>& grid, int jobs, std::uint64_t seed,
         std::optional<Policy> init) {
        SweepOptions opts;
        opts.jobs = jobs;
        opts.plan.seed = seed;
        opts.init = std::move(init);
        py::gil_scoped_release release;
        return sweep(spec, grid, opts);
      },
      py::arg("spec"), py::arg("grid"), py::arg("jobs") = 1, py::arg("seed") = 0, py::arg("init") = py::none());

  m.def("filter_initial_policy", &filter_initial_policy, py::arg("spec"), py::arg("smoothing") = 0.5);

  m.def(
      "classify_regime",
      [](double i_c, double i_m, double i_s, const Multipliers& mult) {
        const Classification c = classify_regime(i_c, i_m, i_s, mult);
        py::list rates;
        for (const auto& r : c.rates) rates.append(py::make_tuple(r.r_m, r.r_s));
        py::object regime = c.feasible ? py::object(py::str(std::string(regime_name(c.regime)))) : py::none();
        return py::make_tuple(regime, rates, py::make_tuple(c.slope_m, c.slope_s));
      },
      py::arg("i_c"), py::arg("i_m"), py::arg("i_s"), py::arg("mult"));

  m.def(
      "onestep_boundary",
      [](const JointBelief& theta, const ModelSpec& spec, double r_m, double r_s) {
        return onestep_boundary(theta, spec, r_m, r_s).distortion;
      },
      py::arg("theta"), py::arg("spec"), py::arg("r_m"), py::arg("r_s"));

  m.def(
      "unbounded_baseline",
      [](const ModelSpec& spec, std::int64_t rollouts, std::uint64_t seed) {
        const auto e = oracle::unbounded_baseline(spec, rollouts, seed);
        return py::make_tuple(e.mean, e.stderr_);
      },
      py::arg("spec"), py::arg("rollouts"), py::arg("seed") = 0);

  m.def(
      "enumerate_cost",
      [](const ModelSpec& spec, const Policy& policy, const Multipliers& mult) {
        std::vector<Matrix> tables;
        for (const auto& q : policy) tables.push_back(q.table);
        const auto c = oracle::enumerate_cost(spec, tables, mult);
        py::dict out;
        out["distortion"] = c.distortion;
        out["i_c"] = c.i_c;
        out["i_m"] = c.i_m;
        out["i_s"] = c.i_s;
        out["lagrangian"] = c.lagrangian;
        return out;
      },
      py::arg("spec"), py::arg("policy"), py::arg("mult") = Multipliers{});
}
