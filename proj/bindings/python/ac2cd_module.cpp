#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "ac2cd/harness.hpp"

namespace py = pybind11;
using namespace ac2cd;

namespace {

StepsizeRule stepsize_from(const std::string& name, double gamma, double a_upper) {
  if (name == "armijo") return ArmijoRule{0.5, 0.1, 1.0, a_upper};
  if (name == "lipschitz") return LipschitzRule{gamma, std::nullopt};
  if (name == "quadratic") return QuadraticExactRule{a_upper};
  if (name == "exact") return ExactLineSearchRule{};
  throw Error(ErrorCode::ConfigError, "unknown stepsize '" + name + "'");
}

IndexRule index_rule_from(const std::string& name) {
  if (name == "threshold") return IndexRule::ThresholdAny;
  if (name == "rate") return IndexRule::RateMode;
  if (name == "fixed") return IndexRule::Fixed;
  throw Error(ErrorCode::ConfigError, "unknown index rule '" + name + "'");
}

py::dict result_to_dict(const SolveResult& res) {
  py::dict out;
  out["x"] = res.x;
  out["objective"] = res.objective;
  out["status"] = terminal_status_name(res.trace.status);
  out["residual"] = res.trace.final_kkt_residual;
  out["iterations"] = static_cast<std::int64_t>(res.trace.records.size()) - 1;
  out["message"] = res.trace.message;
  std::vector<double> objective, stationarity, wall;
  std::vector<std::int64_t> partials, updates;
  for (const auto& rec : res.trace.records) {
    objective.push_back(rec.objective);
    stationarity.push_back(rec.stationarity);
    wall.push_back(rec.wall_time);
    partials.push_back(rec.partial_evals);
    updates.push_back(rec.pair_updates);
  }
  py::dict trace;
  trace["objective"] = objective;
  trace["stationarity"] = stationarity;
  trace["wall_time"] = wall;
  trace["partial_evals"] = partials;
  trace["pair_updates"] = updates;
  out["trace"] = trace;
  return out;
}

Vec start_or_default(const GeneratedInstance& inst, const std::optional<Vec>& x0,
                     std::uint64_t start_seed) {
  return x0 ? *x0 : inst.default_start(start_seed);
}

}  // namespace

PYBIND11_MODULE(_ac2cd, m) {
  m.doc() = "Almost cyclic 2-coordinate descent for singly linearly constrained problems";
  m.attr("__version__") = "0.1.0";

  py::register_exception<Error>(m, "Ac2cdError");

  py::class_<GeneratedInstance>(m, "Instance")
      .def_property_readonly("n", [](const GeneratedInstance& g) { return g.n; })
      .def_property_readonly("m", [](const GeneratedInstance& g) { return g.m; })
      .def_property_readonly("seed", [](const GeneratedInstance& g) { return g.seed; })
      .def_property_readonly("family",
                             [](const GeneratedInstance& g) { return family_name(g.family); })
      .def_property_readonly("level",
                             [](const GeneratedInstance& g) { return g.problem.level; })
      .def("default_start", &GeneratedInstance::default_start, py::arg("seed") = 0)
      .def("objective_value",
           [](const GeneratedInstance& g, const Vec& x) { return g.problem.objective->value(x); })
      .def("partial",
           [](const GeneratedInstance& g, Index i, const Vec& x) {
             return g.problem.objective->partial(i, x);
           })
      .def("gradient",
           [](const GeneratedInstance& g, const Vec& x) { return g.problem.objective->gradient(x); })
      .def("kkt_residual",
           [](const GeneratedInstance& g, const Vec& x) {
             return kkt_residual(x, g.problem.objective->gradient(x), g.problem);
           })
      .def("is_feasible",
           [](const GeneratedInstance& g, const Vec& x) {
             try {
               project_report_feasibility(x, g.problem);
               return true;
             } catch (const Error&) {
               return false;
             }
           })
      .def("save", &write_instance_file, py::arg("path"))
      .def("__repr__", [](const GeneratedInstance& g) {
        std::ostringstream out;
        out << "<ac2cd.Instance family=" << family_name(g.family) << " n=" << g.n
            << " m=" << g.m << ">";
        return out.str();
      });

  m.def("gen_chebyshev", &gen_chebyshev, py::arg("n"), py::arg("m"), py::arg("seed"),
        "Smallest enclosing ball of seeded normal points, as a simplex program");
  m.def("chebyshev_from_points", &make_chebyshev_from_points, py::arg("points"),
        "Enclosing-ball instance from an m x n array of column points");
  m.def("gen_logexp", &gen_logexp, py::arg("n"), py::arg("seed"), py::arg("regime") = 2,
        "Separable strongly convex objective with a zero-sum constraint, no bounds");
  m.def("gen_nonconvex", &gen_nonconvex, py::arg("n"), py::arg("m"), py::arg("neg_fraction"),
        py::arg("seed"), "Indefinite quadratic over the unit simplex");
  m.def("load_svm_dual", &load_svm_dual_file, py::arg("path"), py::arg("c") = 1.0,
        "Transformed SVM dual from a sparse classification file");
  m.def("svm_toy_dataset", &make_svm_toy_dataset, py::arg("n"), py::arg("dim"), py::arg("seed"),
        "Deterministic two-blob dataset in sparse text format");
  m.def("load_instance", &read_instance_file, py::arg("path"));

  m.def(
      "solve",
      [](const GeneratedInstance& inst, std::optional<Vec> x0, const std::string& stepsize,
         const std::string& index_rule, Index fixed_index, double tau, double gamma,
         double a_upper, double epsilon, Index max_outer, std::uint64_t seed,
         std::uint64_t start_seed, bool shuffle) {
        Ac2cdConfig cfg;
        cfg.tau = tau;
        cfg.index_rule = index_rule_from(index_rule);
        cfg.fixed_index = fixed_index >= 0 ? fixed_index : default_fixed_index(inst);
        cfg.stepsize = stepsize_from(stepsize, gamma, a_upper);
        cfg.epsilon = epsilon;
        cfg.max_outer = max_outer;
        cfg.rng_seed = seed;
        cfg.shuffle_each_outer = shuffle;
        const Vec start = start_or_default(inst, x0, start_seed);
        SolveResult res;
        {
          py::gil_scoped_release release;
          res = solve(inst.problem, start, cfg);
        }
        return result_to_dict(res);
      },
      py::arg("instance"), py::arg("x0") = std::nullopt, py::arg("stepsize") = "quadratic",
      py::arg("index_rule") = "rate", py::arg("fixed_index") = -1, py::arg("tau") = 0.9,
      py::arg("gamma") = 0.5, py::arg("a_upper") = 1e12, py::arg("epsilon") = 1e-1,
      py::arg("max_outer") = 1000000, py::arg("seed") = 0, py::arg("start_seed") = 0,
      py::arg("shuffle") = true,
      "Run the AC2CD solver; the separable family defaults to stepsize='lipschitz' "
      "with index_rule='fixed' when those arguments are passed explicitly");

  m.def(
      "run_baseline",
      [](const GeneratedInstance& inst, const std::string& method, std::optional<Vec> x0,
         std::optional<double> f_target, double nu, double epsilon, std::int64_t max_inner,
         std::uint64_t seed, std::uint64_t start_seed) {
        BaselineConfig cfg;
        if (method == "rcd-unif") cfg.method = BaselineMethod::RcdUniform;
        else if (method == "rcd-lips") cfg.method = BaselineMethod::RcdLipschitz;
        else if (method == "mvp") cfg.method = BaselineMethod::Mvp;
        else throw Error(ErrorCode::ConfigError, "unknown baseline '" + method + "'");
        cfg.rng_seed = seed;
        cfg.max_inner = max_inner;
        StopPolicy stop;
        stop.f_target = f_target;
        stop.nu = nu;
        stop.epsilon = epsilon;
        const Vec start = start_or_default(inst, x0, start_seed);
        SolveResult res;
        {
          py::gil_scoped_release release;
          res = run_baseline(inst.problem, start, cfg, stop);
        }
        return result_to_dict(res);
      },
      py::arg("instance"), py::arg("method") = "rcd-unif", py::arg("x0") = std::nullopt,
      py::arg("f_target") = std::nullopt, py::arg("nu") = 1e-6, py::arg("epsilon") = 1e-1,
      py::arg("max_inner") = 1000000, py::arg("seed") = 0, py::arg("start_seed") = 0,
      "Random pair descent (uniform or Lipschitz-weighted) or maximal violating pair");

  m.def(
      "verify",
      [](const std::string& level, std::uint64_t seed) {
        std::vector<CheckResult> checks;
        {
          py::gil_scoped_release release;
          checks = verify_suite(level, seed);
        }
        py::list out;
        for (const auto& check : checks) {
          py::dict item;
          item["name"] = check.name;
          item["pass"] = check.pass;
          item["margin"] = check.margin;
          item["detail"] = check.detail;
          out.append(item);
        }
        return out;
      },
      py::arg("level") = "fast", py::arg("seed") = 1,
      "Run the oracle verification suite and return per-check results");
}
