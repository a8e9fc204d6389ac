#include "ac2cd/harness.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <sstream>

namespace ac2cd {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw Error(ErrorCode::ConfigError, "expected boolean, got '" + v + "'");
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  cfg.methods.clear();
  std::string line;
  std::string section;
  MethodSpec* method = nullptr;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw Error(ErrorCode::ConfigError, "line " + std::to_string(line_no) + ": bad section");
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section.rfind("method", 0) == 0) {
        MethodSpec spec;
        spec.name = trim(section.substr(6));
        if (spec.name.empty()) {
          throw Error(ErrorCode::ConfigError,
                      "line " + std::to_string(line_no) + ": method section needs a name");
        }
        cfg.methods.push_back(spec);
        method = &cfg.methods.back();
      } else {
        method = nullptr;
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::ConfigError,
                  "line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    auto bad_key = [&]() -> Error {
      return Error(ErrorCode::ConfigError, "line " + std::to_string(line_no) + ": unknown key '" +
                                               key + "' in section [" + section + "]");
    };
    if (section == "instance") {
      if (key == "family") cfg.instance.family = family_from_name(value);
      else if (key == "n") cfg.instance.n = std::stoll(value);
      else if (key == "m") cfg.instance.m = std::stoll(value);
      else if (key == "seed") cfg.instance.seed = std::stoull(value);
      else if (key == "regime") cfg.instance.regime = std::stoi(value);
      else if (key == "neg_fraction") cfg.instance.neg_fraction = parse_double(value);
      else if (key == "c") cfg.instance.c_bound = parse_double(value);
      else if (key == "toy_dim") cfg.instance.toy_dim = std::stoll(value);
      else if (key == "path") cfg.instance.path = value;
      else throw bad_key();
    } else if (section == "stop") {
      if (key == "eps") cfg.stop.eps = parse_double(value);
      else if (key == "nu") cfg.stop.nu = parse_double(value);
      else if (key == "max_outer") cfg.stop.max_outer = std::stoll(value);
      else if (key == "max_inner") cfg.stop.max_inner = std::stoll(value);
      else throw bad_key();
    } else if (section == "run") {
      if (key == "repetitions") cfg.run.repetitions = std::stoll(value);
      else if (key == "start_seed") cfg.run.start_seed = std::stoull(value);
      else if (key == "out") cfg.run.out = value;
      else throw bad_key();
    } else if (method != nullptr) {
      if (key == "tau") method->tau = parse_double(value);
      else if (key == "stepsize") method->stepsize = value;
      else if (key == "index_rule") method->index_rule = value;
      else if (key == "fixed_index") method->fixed_index = std::stoll(value);
      else if (key == "gamma") method->gamma = parse_double(value);
      else if (key == "delta") method->delta = parse_double(value);
      else if (key == "armijo_gamma") method->armijo_gamma = parse_double(value);
      else if (key == "a_lower") method->a_lower = parse_double(value);
      else if (key == "a_upper") method->a_upper = parse_double(value);
      else if (key == "seed") method->seed = std::stoull(value);
      else if (key == "shuffle") method->shuffle = parse_bool(value);
      else throw bad_key();
    } else {
      throw Error(ErrorCode::ConfigError,
                  "line " + std::to_string(line_no) + ": key outside a known section");
    }
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open config '" + path + "'");
  return parse_config(in);
}

std::string write_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "[instance]\n";
  out << "family = " << family_name(cfg.instance.family) << '\n';
  out << "n = " << cfg.instance.n << '\n';
  out << "m = " << cfg.instance.m << '\n';
  out << "seed = " << cfg.instance.seed << '\n';
  out << "regime = " << cfg.instance.regime << '\n';
  out << "neg_fraction = " << format_double(cfg.instance.neg_fraction) << '\n';
  out << "c = " << format_double(cfg.instance.c_bound) << '\n';
  out << "toy_dim = " << cfg.instance.toy_dim << '\n';
  out << "path = " << cfg.instance.path << '\n';
  out << "\n[stop]\n";
  out << "eps = " << format_double(cfg.stop.eps) << '\n';
  out << "nu = " << format_double(cfg.stop.nu) << '\n';
  out << "max_outer = " << cfg.stop.max_outer << '\n';
  out << "max_inner = " << cfg.stop.max_inner << '\n';
  out << "\n[run]\n";
  out << "repetitions = " << cfg.run.repetitions << '\n';
  out << "start_seed = " << cfg.run.start_seed << '\n';
  out << "out = " << cfg.run.out << '\n';
  for (const auto& method : cfg.methods) {
    out << "\n[method " << method.name << "]\n";
    out << "tau = " << format_double(method.tau) << '\n';
    out << "stepsize = " << method.stepsize << '\n';
    out << "index_rule = " << method.index_rule << '\n';
    out << "fixed_index = " << method.fixed_index << '\n';
    out << "gamma = " << format_double(method.gamma) << '\n';
    out << "delta = " << format_double(method.delta) << '\n';
    out << "armijo_gamma = " << format_double(method.armijo_gamma) << '\n';
    out << "a_lower = " << format_double(method.a_lower) << '\n';
    out << "a_upper = " << format_double(method.a_upper) << '\n';
    out << "seed = " << method.seed << '\n';
    out << "shuffle = " << (method.shuffle ? "true" : "false") << '\n';
  }
  return out.str();
}

GeneratedInstance build_instance(const InstanceSpec& spec) {
  switch (spec.family) {
    case Family::Chebyshev:
      if (!spec.path.empty()) return read_instance_file(spec.path);
      return gen_chebyshev(spec.n, spec.m, spec.seed);
    case Family::LogExpEquality:
      if (!spec.path.empty()) return read_instance_file(spec.path);
      return gen_logexp(spec.n, spec.seed, spec.regime);
    case Family::NonconvexSimplex:
      if (!spec.path.empty()) return read_instance_file(spec.path);
      return gen_nonconvex(spec.n, spec.m, spec.neg_fraction, spec.seed);
    case Family::SvmDual: {
      if (!spec.path.empty()) return load_svm_dual_file(spec.path, spec.c_bound);
      std::istringstream toy(make_svm_toy_dataset(spec.n, spec.toy_dim, spec.seed));
      GeneratedInstance inst = load_svm_dual(toy, spec.c_bound);
      inst.seed = spec.seed;
      return inst;
    }
  }
  throw Error(ErrorCode::ConfigError, "unknown family");
}

bool instance_is_convex(const GeneratedInstance& inst) {
  return inst.family != Family::NonconvexSimplex;
}

Index default_fixed_index(const GeneratedInstance& inst) {
  if (!inst.separable) return 0;
  // The protocol pins j to the coordinate with the largest inverse constant.
  const Vec& lips = inst.separable->coordinate_lipschitz();
  Index best = 0;
  for (Index i = 1; i < lips.size(); ++i) {
    if (lips[i] < lips[best]) best = i;
  }
  return best;
}

Ac2cdConfig make_solver_config(const MethodSpec& method, const StopSpec& stop,
                               const GeneratedInstance& inst) {
  Ac2cdConfig cfg;
  cfg.tau = method.tau;
  if (method.index_rule == "threshold") cfg.index_rule = IndexRule::ThresholdAny;
  else if (method.index_rule == "rate") cfg.index_rule = IndexRule::RateMode;
  else if (method.index_rule == "fixed") cfg.index_rule = IndexRule::Fixed;
  else throw Error(ErrorCode::ConfigError, "unknown index rule '" + method.index_rule + "'");
  cfg.fixed_index = method.fixed_index >= 0 ? method.fixed_index : default_fixed_index(inst);
  if (method.stepsize == "armijo") {
    cfg.stepsize = ArmijoRule{method.delta, method.armijo_gamma, method.a_lower, method.a_upper};
  } else if (method.stepsize == "lipschitz") {
    cfg.stepsize = LipschitzRule{method.gamma, std::nullopt};
  } else if (method.stepsize == "quadratic") {
    cfg.stepsize = QuadraticExactRule{method.a_upper};
  } else if (method.stepsize == "exact") {
    cfg.stepsize = ExactLineSearchRule{};
  } else {
    throw Error(ErrorCode::ConfigError, "unknown stepsize '" + method.stepsize + "'");
  }
  cfg.epsilon = stop.eps;
  cfg.max_outer = stop.max_outer;
  cfg.rng_seed = method.seed;
  cfg.shuffle_each_outer = method.shuffle;
  return cfg;
}

BaselineConfig make_baseline_config(const MethodSpec& method, const StopSpec& stop) {
  BaselineConfig cfg;
  if (method.name == "rcd-unif") cfg.method = BaselineMethod::RcdUniform;
  else if (method.name == "rcd-lips") cfg.method = BaselineMethod::RcdLipschitz;
  else if (method.name == "mvp") cfg.method = BaselineMethod::Mvp;
  else throw Error(ErrorCode::ConfigError, "unknown baseline '" + method.name + "'");
  cfg.rng_seed = method.seed;
  cfg.gamma = method.gamma;
  cfg.a_upper = method.a_upper;
  cfg.max_inner = stop.max_inner;
  return cfg;
}

void write_trace_csv(const RunTrace& trace, std::ostream& out) {
  out << "k,objective,stationarity,g_min,g_max,j,partial_evals,pair_updates,wall_time\n";
  for (const auto& rec : trace.records) {
    out << rec.k << ',' << format_double(rec.objective) << ',' << format_double(rec.stationarity)
        << ',' << format_double(rec.g_min) << ',' << format_double(rec.g_max) << ',' << rec.j
        << ',' << rec.partial_evals << ',' << rec.pair_updates << ','
        << format_double(rec.wall_time) << '\n';
  }
  out << "# status " << terminal_status_name(trace.status) << '\n';
}

void emit_error_curve(const RunTrace& trace, double f_target, std::ostream& out) {
  out << "wall_time,normalized_error,clamped\n";
  for (const auto& rec : trace.records) {
    const double err = (rec.objective - f_target) / (1.0 + std::abs(f_target));
    const bool clamped = !(err > 1e-16);
    out << format_double(rec.wall_time) << ',' << format_double(clamped ? 1e-16 : err) << ','
        << (clamped ? 1 : 0) << '\n';
  }
}

namespace {

std::string repetition_label(Index rep) { return rep < 0 ? "avg" : std::to_string(rep); }

}  // namespace

std::string format_summary_csv(const std::vector<SummaryRow>& rows) {
  std::ostringstream out;
  out << "method,repetition,objective,outer_iterations,partial_evals,status,residual,wall_time\n";
  for (const auto& row : rows) {
    out << row.method << ',' << repetition_label(row.repetition) << ','
        << format_double(row.objective) << ',' << row.outer_iterations << ',' << row.partial_evals
        << ',' << row.status << ',' << format_double(row.residual) << ','
        << format_double(row.wall_time) << '\n';
  }
  return out.str();
}

std::string format_summary_table(const std::vector<SummaryRow>& rows) {
  std::vector<std::array<std::string, 8>> cells;
  cells.push_back({"method", "rep", "objective", "outer", "partials", "status", "residual",
                   "time(s)"});
  for (const auto& row : rows) {
    std::ostringstream obj, res, tm;
    obj << std::setprecision(10) << row.objective;
    res << std::setprecision(3) << row.residual;
    tm << std::fixed << std::setprecision(3) << row.wall_time;
    cells.push_back({row.method, repetition_label(row.repetition), obj.str(),
                     std::to_string(row.outer_iterations), std::to_string(row.partial_evals),
                     row.status, res.str(), tm.str()});
  }
  std::array<std::size_t, 8> width{};
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << std::left << std::setw(static_cast<int>(width[c]) + 2) << row[c];
    }
    out << '\n';
  }
  return out.str();
}

namespace {

struct RepRun {
  std::string method;
  SolveResult result;
};

struct RepOutput {
  Index rep = 0;
  std::vector<RepRun> runs;
  double f_target = 0.0;
  bool target_used = false;
};

SummaryRow make_row(const std::string& method, Index rep, const SolveResult& res) {
  SummaryRow row;
  row.method = method;
  row.repetition = rep;
  row.objective = res.objective;
  // The terminal record is bookkeeping, not an iteration.
  row.outer_iterations = static_cast<Index>(res.trace.records.size()) - 1;
  row.partial_evals = res.trace.records.back().partial_evals;
  row.status = terminal_status_name(res.trace.status);
  row.residual = res.trace.final_kkt_residual;
  row.wall_time = res.trace.records.back().wall_time;
  return row;
}

int thread_budget() {
  if (const char* env = std::getenv("AC2CD_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.methods.empty()) {
    throw Error(ErrorCode::ConfigError, "experiment needs at least one method");
  }
  if (cfg.methods.front().name != "ac2cd") {
    throw Error(ErrorCode::ConfigError,
                "the first method must be ac2cd (baselines stop against its objective)");
  }
  const GeneratedInstance inst = build_instance(cfg.instance);
  const bool convex = instance_is_convex(inst);

  auto run_repetition = [&](Index rep) {
    RepOutput out;
    out.rep = rep;
    const Vec x0 = inst.default_start(cfg.run.start_seed + static_cast<std::uint64_t>(rep));
    for (const auto& method : cfg.methods) {
      if (method.name == "ac2cd") {
        MethodSpec spec = method;
        spec.seed = method.seed + static_cast<std::uint64_t>(rep);
        const Ac2cdConfig solver_cfg = make_solver_config(spec, cfg.stop, inst);
        out.runs.push_back(RepRun{method.name, solve(inst.problem, x0, solver_cfg)});
        out.f_target = out.runs.back().result.objective;
        out.target_used = convex;
      } else {
        MethodSpec spec = method;
        spec.seed = method.seed + static_cast<std::uint64_t>(rep);
        StopPolicy stop;
        stop.nu = cfg.stop.nu;
        stop.epsilon = cfg.stop.eps;
        if (convex) stop.f_target = out.f_target;
        out.runs.push_back(
            RepRun{method.name, run_baseline(inst.problem, x0, make_baseline_config(spec, cfg.stop),
                                             stop)});
      }
    }
    return out;
  };

  const Index reps = std::max<Index>(1, cfg.run.repetitions);
  std::vector<RepOutput> outputs(static_cast<std::size_t>(reps));
  const int threads = thread_budget();
  if (threads > 1 && reps > 1) {
    for (Index base = 0; base < reps; base += threads) {
      std::vector<std::future<RepOutput>> futures;
      for (Index r = base; r < std::min<Index>(reps, base + threads); ++r) {
        futures.push_back(std::async(std::launch::async, run_repetition, r));
      }
      for (Index r = base; r < std::min<Index>(reps, base + threads); ++r) {
        outputs[static_cast<std::size_t>(r)] = futures[static_cast<std::size_t>(r - base)].get();
      }
    }
  } else {
    for (Index r = 0; r < reps; ++r) outputs[static_cast<std::size_t>(r)] = run_repetition(r);
  }

  // Single-writer output pass.
  ExperimentResult result;
  namespace fs = std::filesystem;
  fs::create_directories(cfg.run.out);
  for (const auto& rep_out : outputs) {
    for (const auto& run : rep_out.runs) {
      const std::string base =
          cfg.run.out + "/" + run.method + "_rep" + std::to_string(rep_out.rep);
      {
        std::ofstream trace_file(base + ".trace.csv");
        write_trace_csv(run.result.trace, trace_file);
        result.written_files.push_back(base + ".trace.csv");
      }
      if (rep_out.target_used) {
        std::ofstream curve_file(base + ".curve.csv");
        emit_error_curve(run.result.trace, rep_out.f_target, curve_file);
        result.written_files.push_back(base + ".curve.csv");
      }
      result.rows.push_back(make_row(run.method, rep_out.rep, run.result));
    }
  }
  if (reps > 1) {
    for (const auto& method : cfg.methods) {
      SummaryRow avg;
      avg.method = method.name;
      avg.repetition = -1;
      avg.status = "avg";
      Index count = 0;
      for (const auto& row : result.rows) {
        if (row.method != method.name || row.repetition < 0) continue;
        avg.objective += row.objective;
        avg.outer_iterations += row.outer_iterations;
        avg.partial_evals += row.partial_evals;
        avg.residual += row.residual;
        avg.wall_time += row.wall_time;
        ++count;
      }
      if (count > 0) {
        avg.objective /= count;
        avg.outer_iterations /= count;
        avg.partial_evals /= count;
        avg.residual /= count;
        avg.wall_time /= count;
        result.rows.push_back(avg);
      }
    }
  }
  {
    std::ofstream csv(cfg.run.out + "/summary.csv");
    csv << format_summary_csv(result.rows);
    result.written_files.push_back(cfg.run.out + "/summary.csv");
    std::ofstream txt(cfg.run.out + "/summary.txt");
    txt << format_summary_table(result.rows);
    result.written_files.push_back(cfg.run.out + "/summary.txt");
  }
  return result;
}

// ---------------------------------------------------------------------------
// Verification suite
// ---------------------------------------------------------------------------

namespace {

Vec random_feasible_point_impl(const GeneratedInstance& inst, std::uint64_t seed) {
  Rng rng(seed);
  Vec x = inst.default_start(seed);
  const Index n = inst.n;
  for (Index t = 0; t < 3 * n; ++t) {
    const Index i = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
    const Index j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
    if (i == j) continue;
    const double g = rng.uniform() < 0.5 ? 1.0 : -1.0;
    const ExtReal amax = max_feasible_stepsize(x, i, j, g, inst.problem.bounds);
    const double alpha = rng.uniform() * amax.min_with(1.0);
    x[i] += alpha * g;
    x[j] -= alpha * g;
    x[i] = inst.problem.bounds.clamp_drift(i, x[i], Problem::kBoundTol);
    x[j] = inst.problem.bounds.clamp_drift(j, x[j], Problem::kBoundTol);
  }
  return x;
}

std::vector<GeneratedInstance> probe_instances(std::uint64_t seed) {
  std::vector<GeneratedInstance> probes;
  probes.push_back(gen_chebyshev(24, 8, seed));
  {
    std::istringstream toy(make_svm_toy_dataset(20, 4, seed + 1));
    probes.push_back(load_svm_dual(toy, 1.0));
  }
  probes.push_back(gen_logexp(24, seed + 2, 2));
  probes.push_back(gen_nonconvex(20, 12, 0.5, seed + 3));
  return probes;
}

struct Probe {
  Vec z;
  Index p = 0;
  Index j = 0;
  double g = 0.0;
  double alpha_max = 0.0;
};

// Random working pair with a nonzero derivative difference and a usable
// feasible interval.
std::optional<Probe> draw_probe(const GeneratedInstance& inst, Rng& rng, std::uint64_t point_seed) {
  Probe probe;
  probe.z = random_feasible_point_impl(inst, point_seed);
  const Objective& obj = *inst.problem.objective;
  for (int attempt = 0; attempt < 40; ++attempt) {
    const Index p = static_cast<Index>(rng.below(static_cast<std::uint64_t>(inst.n)));
    const Index j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(inst.n)));
    if (p == j) continue;
    const double g = obj.partial(j, probe.z) - obj.partial(p, probe.z);
    if (std::abs(g) < 1e-8) continue;
    const ExtReal amax = max_feasible_stepsize(probe.z, p, j, g, inst.problem.bounds);
    const double capped = amax.min_with(4.0);  // finite interval for unbounded problems
    if (capped < 1e-6) continue;
    probe.p = p;
    probe.j = j;
    probe.g = g;
    probe.alpha_max = capped;
    return probe;
  }
  return std::nullopt;
}

}  // namespace

Vec random_feasible_point(const GeneratedInstance& inst, std::uint64_t seed) {
  return random_feasible_point_impl(inst, seed);
}

std::vector<CheckResult> verify_suite(const std::string& level, std::uint64_t seed,
                                      bool inject_cache_fault) {
  if (level != "fast" && level != "full") {
    throw Error(ErrorCode::ConfigError, "verify level is 'fast' or 'full'");
  }
  const bool full = level == "full";
  std::vector<CheckResult> checks;

  // Gradient oracle against central differences.
  for (const auto& inst : probe_instances(seed)) {
    CheckResult check;
    check.name = std::string("gradient-consistency/") + family_name(inst.family);
    double worst = 0.0;
    for (int probe = 0; probe < 20; ++probe) {
      const Vec x = random_feasible_point_impl(inst, seed + 10 + probe);
      const Vec analytic = inst.problem.objective->gradient(x);
      const Vec numeric = finite_diff_gradient(inst.problem, x, 1e-6);
      for (Index i = 0; i < inst.n; ++i) {
        worst = std::max(worst,
                         std::abs(analytic[i] - numeric[i]) / (1.0 + std::abs(analytic[i])));
      }
    }
    check.margin = worst;
    check.pass = worst <= 1e-5;
    check.detail = "max relative gradient error over 20 feasible probes";
    checks.push_back(check);
  }

  // Pair-move expansion against a full shifted evaluation.
  for (const auto& inst : probe_instances(seed + 100)) {
    CheckResult check;
    check.name = std::string("pair-move-identity/") + family_name(inst.family);
    Rng rng(seed + 5);
    double worst = 0.0;
    for (int probe = 0; probe < 50; ++probe) {
      const auto drawn = draw_probe(inst, rng, seed + 200 + probe);
      if (!drawn) continue;
      const double t = drawn->alpha_max * rng.uniform() * drawn->g;
      Vec shifted = drawn->z;
      shifted[drawn->p] += t;
      shifted[drawn->j] -= t;
      const double direct = inst.problem.objective->value(shifted);
      const double expanded = inst.problem.objective->pair_move_value(drawn->z, drawn->p,
                                                                      drawn->j, t);
      worst = std::max(worst, std::abs(direct - expanded) / (1.0 + std::abs(direct)));
    }
    check.margin = worst;
    check.pass = worst <= 1e-12;
    check.detail = "max relative pair_move_value error";
    checks.push_back(check);
  }

  // Residual cache coherence under random accepted moves.
  {
    CheckResult check;
    check.name = "cache-coherence";
    const GeneratedInstance inst = gen_chebyshev(30, 10, seed + 7);
    auto state = inst.problem.objective->make_state(inst.default_start(seed));
    auto* quad_state = dynamic_cast<QuadraticOracleState*>(state.get());
    Rng rng(seed + 8);
    for (int t = 0; t < 200; ++t) {
      const Index i = static_cast<Index>(rng.below(static_cast<std::uint64_t>(inst.n)));
      const Index j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(inst.n)));
      if (i == j) continue;
      const double g = rng.uniform() < 0.5 ? 1.0 : -1.0;
      const ExtReal amax = max_feasible_stepsize(state->point(), i, j, g, inst.problem.bounds);
      const double alpha = rng.uniform() * amax.min_with(1.0);
      if (alpha > 0.0) state->apply_move(i, j, alpha * g);
    }
    if (inject_cache_fault) quad_state->corrupt_residual(1e-3);
    const Vec fresh = inst.quadratic->residual_at(state->point());
    const double err = (quad_state->residual() - fresh).cwiseAbs().maxCoeff() /
                       (1.0 + fresh.cwiseAbs().maxCoeff());
    check.margin = err;
    check.pass = err <= 1e-10;
    check.detail = "relative residual drift after 200 pair moves";
    checks.push_back(check);
  }

  // Golden-section line search against the grid oracle; closed-form clip on
  // positive-curvature quadratic probes.
  for (const auto& inst : probe_instances(seed + 300)) {
    CheckResult check;
    check.name = std::string("line-search-oracle/") + family_name(inst.family);
    Rng rng(seed + 9);
    double worst = 0.0;
    double worst_quad = 0.0;
    int done = 0;
    for (int probe = 0; probe < 400 && done < 100; ++probe) {
      const auto drawn = draw_probe(inst, rng, seed + 400 + probe);
      if (!drawn) continue;
      ++done;
      auto state = inst.problem.objective->make_state(drawn->z);
      const double exact =
          exact_line_search(*state, drawn->p, drawn->j, drawn->g, ExtReal(drawn->alpha_max),
                            ExactLineSearchRule{})
              .alpha;
      const double brute = brute_force_line_search(inst.problem, drawn->z, drawn->p, drawn->j,
                                                   drawn->g, drawn->alpha_max);
      worst = std::max(worst, std::abs(exact - brute) / drawn->alpha_max);
      if (inst.problem.objective->is_quadratic()) {
        const double kappa = inst.problem.objective->pair_curvature(drawn->p, drawn->j);
        if (kappa > 0.0) {
          const double step =
              quadratic_stepsize(kappa, ExtReal(drawn->alpha_max), 1e12);
          const double clip = std::min(drawn->alpha_max, 1.0 / kappa);
          worst_quad = std::max(worst_quad, std::abs(step - clip));
        }
      }
    }
    check.margin = worst;
    check.pass = done == 100 && worst <= 1e-6 && worst_quad == 0.0;
    check.detail = "max |alpha_exact - alpha_grid| / alpha_max over 100 probes";
    checks.push_back(check);
  }

  // Trajectory equivalence with cyclic coordinate descent on the transformed
  // problem.
  {
    CheckResult check;
    check.name = "trajectory-equivalence";
    const int seeds = full ? 20 : 5;
    double worst = 0.0;
    for (int s = 0; s < seeds; ++s) {
      const GeneratedInstance inst = gen_logexp(50, seed + 500 + s, 2);
      const Index jbar = default_fixed_index(inst);
      worst = std::max(worst, trajectory_equivalence_check(inst.problem, jbar, 10, seed + s));
    }
    check.margin = worst;
    check.pass = worst <= 1e-9;
    check.detail = "max coordinate deviation over 10 sweeps, n = 50";
    checks.push_back(check);
  }

  // Non-asymptotic rate bound on the separable family.
  {
    CheckResult check;
    check.name = "rate-bound";
    const int seeds = full ? 20 : 3;
    bool ok = true;
    double worst_margin = 1.0;
    for (int s = 0; s < seeds; ++s) {
      const GeneratedInstance inst = gen_logexp(100, seed + 600 + s, 2);
      const RateReport report = rate_bound_check(inst, default_fixed_index(inst));
      ok = ok && report.per_step_ok && report.c_hat < 1.0 && report.c_hat <= report.c_bound;
      worst_margin = std::min(worst_margin, report.c_bound - report.max_ratio);
    }
    check.margin = worst_margin;
    check.pass = ok && worst_margin >= 0.0;
    check.detail = "min (C - max per-step ratio) over seeded instances, n = 100";
    checks.push_back(check);
  }

  if (full) {
    // Desk-scale benchmark protocol: baselines must reach the AC2CD objective.
    CheckResult check;
    check.name = "benchmark-chebyshev-n500";
    ExperimentConfig cfg;
    cfg.instance.family = Family::Chebyshev;
    cfg.instance.n = 500;
    cfg.instance.m = 50;
    cfg.instance.seed = seed;
    cfg.run.out = (std::filesystem::temp_directory_path() / "ac2cd_verify_full").string();
    cfg.methods = {MethodSpec{}, MethodSpec{}, MethodSpec{}};
    cfg.methods[1].name = "rcd-unif";
    cfg.methods[2].name = "mvp";
    const ExperimentResult result = run_experiment(cfg);
    bool ok = true;
    double worst = 0.0;
    double target = 0.0;
    for (const auto& row : result.rows) {
      if (row.method == "ac2cd") target = row.objective;
    }
    for (const auto& row : result.rows) {
      if (row.method == "ac2cd") continue;
      const double err = (row.objective - target) / (1.0 + std::abs(target));
      worst = std::max(worst, err);
      ok = ok && row.status == "Converged";
    }
    check.margin = worst;
    check.pass = ok && worst <= 1e-6;
    check.detail = "normalized error of rcd-unif and mvp vs the ac2cd objective";
    checks.push_back(check);
  }

  return checks;
}

}  // namespace ac2cd
