// Python bindings for the sbda library.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "sbda/checks.hpp"
#include "sbda/config.hpp"
#include "sbda/experiment.hpp"
#include "sbda/instance_io.hpp"
#include "sbda/schedules.hpp"

namespace py = pybind11;
using namespace sbda;

namespace {

using OraclePtr = std::shared_ptr<StochasticOracle>;

BlockParams Params(const Vector& M, const Vector& D) {
  if (M.size() != D.size()) throw std::invalid_argument("M and D must have the same length");
  return BlockParams{M, D};
}

BlockVector Point(const StochasticOracle& oracle, const Vector& x) {
  if (x.size() != oracle.partition().total()) {
    throw std::invalid_argument("point has the wrong dimension");
  }
  return BlockVector(oracle.partition(), x);
}

py::dict RunFromJson(const std::string& config_text, const OraclePtr& given, bool record_trace) {
  RunConfig config = ParseRunConfig(nlohmann::json::parse(config_text));
  config.Validate();
  OraclePtr oracle = given ? given : OraclePtr(BuildProblem(config.problem));
  RunResult result;
  BlockParams params;
  {
    py::gil_scoped_release release;
    params = ResolveParams(*oracle, config.params, config.problem.seed);
    result = ExecuteRun(*oracle, config, params, record_trace);
  }
  py::list trace;
  for (const TracePoint& p : result.trace) {
    py::dict row;
    row["t"] = p.t;
    row["queries"] = p.queries;
    row["passes"] = p.passes;
    row["objective"] = p.objective;
    row["ms"] = p.ms;
    trace.append(row);
  }
  py::dict out;
  out["algorithm"] = result.meta.algorithm;
  out["schedule"] = result.meta.schedule_id;
  out["sampler"] = result.meta.sampler_id;
  out["averaged"] = result.averaged.data();
  out["final"] = result.final_point.data();
  out["queries"] = result.queries;
  out["passes"] = result.passes;
  out["M"] = params.M;
  out["D"] = params.D;
  out["trace"] = trace;
  return out;
}

Vector InitialGamma(const std::string& id, const Vector& M, const Vector& D, Index horizon,
                    double rho, double lambda, const std::optional<Vector>& p) {
  const BlockParams params = Params(M, D);
  const Index n = params.num_blocks();
  const SamplingDistribution dist =
      p ? SamplingDistribution::FromWeights(*p) : SamplingDistribution::Uniform(n);
  switch (ParseScheduleKind(id)) {
    case ScheduleKind::kConstConvex:
      return Schedule::ConstConvex(params, horizon, rho).InitialGamma();
    case ScheduleKind::kAdaptiveConvex:
      return Schedule::AdaptiveConvex(params, rho).InitialGamma();
    case ScheduleKind::kStronglyConvexSimple:
      return Schedule::StronglyConvexSimple(n, lambda, rho).InitialGamma();
    case ScheduleKind::kStronglyConvexAggressive:
      return Schedule::StronglyConvexAggressive(n, lambda, rho, horizon).InitialGamma();
    case ScheduleKind::kConstNonuniform:
      return Schedule::ConstNonuniform(params, horizon, rho, dist).InitialGamma();
    case ScheduleKind::kAdaptiveNonuniform:
      return Schedule::AdaptiveNonuniform(params, rho, dist).InitialGamma();
  }
  throw std::invalid_argument("unknown schedule id " + id);
}

}  // namespace

PYBIND11_MODULE(_sbda, m) {
  m.doc() = "Stochastic block dual averaging";

  py::class_<StochasticOracle, OraclePtr>(m, "Oracle")
      .def_property_readonly("dim", [](const StochasticOracle& o) { return o.partition().total(); })
      .def_property_readonly("block_sizes",
                             [](const StochasticOracle& o) { return o.partition().sizes(); })
      .def_property_readonly("dataset_size", &StochasticOracle::dataset_size)
      .def_property_readonly("regularizer",
                             [](const StochasticOracle& o) { return o.regularizer().ToString(); })
      .def_property_readonly("meta", &StochasticOracle::meta)
      .def_property_readonly("planted",
                             [](const StochasticOracle& o) -> std::optional<Vector> {
                               if (!o.planted()) return std::nullopt;
                               return o.planted()->data();
                             })
      .def("objective",
           [](const StochasticOracle& o, const Vector& x) { return o.Objective(Point(o, x)); })
      .def("loss", [](const StochasticOracle& o, const Vector& x) { return o.Loss(Point(o, x)); })
      .def("subgradient",
           [](const StochasticOracle& o, const Vector& x) {
             return o.ExpectedSubgradient(Point(o, x)).data();
           })
      .def("save", [](const StochasticOracle& o, const std::string& path) { SaveInstance(o, path); });

  m.def("load_instance", [](const std::string& path) { return OraclePtr(LoadInstance(path)); });

  m.def(
      "generate",
      [](const std::string& config_text) {
        RunConfig config;
        config.problem = ParseRunConfig(nlohmann::json::parse(config_text)).problem;
        config.problem.instance.clear();
        config.Validate();
        return OraclePtr(BuildProblem(config.problem));
      },
      py::arg("problem_json"));

  m.def(
      "resolve_params",
      [](const OraclePtr& oracle, Index probes, Index samples, double radius, bool planted,
         std::uint64_t seed) {
        ParamsConfig pc{probes, samples, radius, planted};
        const BlockParams p = ResolveParams(*oracle, pc, seed);
        return std::make_pair(p.M, p.D);
      },
      py::arg("oracle"), py::arg("probes") = 4, py::arg("samples") = 200, py::arg("radius") = 1.0,
      py::arg("planted") = true, py::arg("seed") = 0);

  m.def("run", &RunFromJson, py::arg("config_json"), py::arg("oracle") = OraclePtr(),
        py::arg("record_trace") = true);

  m.def(
      "optimal_sampling",
      [](const Vector& M, const Vector& D) { return OptimalSampling(Params(M, D)).probabilities(); },
      py::arg("M"), py::arg("D"));

  m.def("initial_gamma", &InitialGamma, py::arg("schedule"), py::arg("M"), py::arg("D"),
        py::arg("horizon") = 1, py::arg("rho") = 1.0, py::arg("lam") = 0.0,
        py::arg("p") = std::nullopt);

  m.def(
      "joint_optimum",
      [](const Vector& a, const Vector& b) {
        const JointSolution s = JointOptimum(a, b);
        return std::make_pair(s.x, s.y);
      },
      py::arg("a"), py::arg("b"));

  m.def("check_names", []() {
    std::vector<std::string> names;
    for (const CheckInfo& info : CheckRegistry()) names.push_back(info.name);
    return names;
  });

  m.def(
      "run_checks",
      [](std::uint64_t seed, const std::vector<std::string>& names) {
        py::list out;
        for (const CheckResult& r : RunChecks(seed, names)) {
          py::dict row;
          row["name"] = r.name;
          row["passed"] = r.passed;
          row["margin"] = r.margin;
          row["detail"] = r.detail;
          out.append(row);
        }
        return out;
      },
      py::arg("seed") = 0, py::arg("names") = std::vector<std::string>{});
}
