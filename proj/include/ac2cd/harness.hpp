#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ac2cd/baselines.hpp"
#include "ac2cd/instances.hpp"
#include "ac2cd/verify.hpp"

namespace ac2cd {

struct InstanceSpec {
  Family family = Family::Chebyshev;
  Index n = 500;
  Index m = 50;
  std::uint64_t seed = 1;
  int regime = 2;            // logexp
  double neg_fraction = 0.5; // nonconvex
  double c_bound = 1.0;      // svm
  Index toy_dim = 6;         // generated svm toy feature count
  std::string path;          // dataset / serialized instance; empty generates
};

struct MethodSpec {
  std::string name = "ac2cd";  // ac2cd | rcd-unif | rcd-lips | mvp
  double tau = 0.9;
  std::string stepsize = "quadratic";  // armijo | lipschitz | quadratic | exact
  std::string index_rule = "rate";     // threshold | rate | fixed
  Index fixed_index = -1;              // -1: family default (smallest L_i for separable)
  double gamma = 0.5;
  double delta = 0.5;
  double armijo_gamma = 0.1;
  double a_lower = 1.0;
  double a_upper = 1e12;
  std::uint64_t seed = 0;
  bool shuffle = true;
};

struct StopSpec {
  double eps = 1e-1;
  double nu = 1e-6;
  Index max_outer = 1000000;
  std::int64_t max_inner = 1000000;
};

struct RunSpec {
  Index repetitions = 1;
  std::uint64_t start_seed = 0;
  std::string out = "results";
};

struct ExperimentConfig {
  InstanceSpec instance;
  StopSpec stop;
  RunSpec run;
  std::vector<MethodSpec> methods;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_file(const std::string& path);
std::string write_config(const ExperimentConfig& cfg);

struct SummaryRow {
  std::string method;
  Index repetition = 0;  // -1 designates the per-method average row
  double objective = 0.0;
  Index outer_iterations = 0;
  std::int64_t partial_evals = 0;
  std::string status;
  double residual = 0.0;
  double wall_time = 0.0;
};

GeneratedInstance build_instance(const InstanceSpec& spec);

// Seeded scramble by random feasible pair moves from the family's default
// start; stays inside the constraint set.
Vec random_feasible_point(const GeneratedInstance& inst, std::uint64_t seed);
bool instance_is_convex(const GeneratedInstance& inst);
Index default_fixed_index(const GeneratedInstance& inst);

Ac2cdConfig make_solver_config(const MethodSpec& method, const StopSpec& stop,
                               const GeneratedInstance& inst);
BaselineConfig make_baseline_config(const MethodSpec& method, const StopSpec& stop);

void write_trace_csv(const RunTrace& trace, std::ostream& out);
// (elapsed seconds, normalized error) records; zero/negative errors are
// clamped to 1e-16 and flagged in the third column.
void emit_error_curve(const RunTrace& trace, double f_target, std::ostream& out);

std::string format_summary_csv(const std::vector<SummaryRow>& rows);
std::string format_summary_table(const std::vector<SummaryRow>& rows);

struct ExperimentResult {
  std::vector<SummaryRow> rows;
  std::vector<std::string> written_files;
};

// Runs AC2CD first; on convex instances its final objective becomes the
// normalized-error target for the baselines. Parallel repetitions are capped
// by the AC2CD_THREADS environment variable.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

struct CheckResult {
  std::string name;
  bool pass = false;
  double margin = 0.0;  // measured quantity, check-specific
  std::string detail;
};

// Oracle checks: gradient consistency, pair-move identity, cache coherence,
// line-search equivalences, trajectory equivalence, rate bound. "full" adds
// the desk-scale benchmark reproduction on top of "fast" (n <= 100).
std::vector<CheckResult> verify_suite(const std::string& level, std::uint64_t seed = 1,
                                      bool inject_cache_fault = false);

}  // namespace ac2cd
