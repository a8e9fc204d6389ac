#include "ac2cd/solver.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "ac2cd/rng.hpp"

namespace ac2cd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr Index kCacheRefreshInterval = 1000;  // outer iterations

bool below_upper(const Problem& prob, const Vec& z, Index i) {
  const ExtReal u = prob.bounds.upper(i);
  return !u.finite() || z[i] < u.value();
}

bool above_lower(const Problem& prob, const Vec& z, Index i) {
  const ExtReal l = prob.bounds.lower(i);
  return !l.finite() || z[i] > l.value();
}

// Smallest index free to give mass away, cyclically offset for stall escape.
// Used when every coordinate sits on a bound (D^k = 0), where the threshold
// rule accepts any index but only a donor admits feasible pair moves.
Index smallest_donor(const Vec& x, const Problem& prob, Index offset) {
  std::vector<Index> donors;
  for (Index h = 0; h < prob.n; ++h) {
    if (above_lower(prob, x, h)) donors.push_back(h);
  }
  if (donors.empty()) {
    throw Error(ErrorCode::DegenerateLevelSet,
                "every coordinate is pinned at a bound; the feasible set is a single point");
  }
  return donors[static_cast<std::size_t>(offset % static_cast<Index>(donors.size()))];
}

struct DistanceScan {
  ExtReal d_max = ExtReal(0.0);
  Index argmax = 0;  // smallest index attaining d_max
};

DistanceScan scan_distances(const Vec& x, const Problem& prob) {
  DistanceScan scan;
  scan.d_max = prob.bounds.nearest_bound_distance(0, x[0]);
  for (Index h = 1; h < prob.n; ++h) {
    const ExtReal d = prob.bounds.nearest_bound_distance(h, x[h]);
    if (d > scan.d_max) {
      scan.d_max = d;
      scan.argmax = h;
    }
  }
  return scan;
}

Index select_threshold_impl(const Vec& x, double tau, const Problem& prob, Index stall_offset) {
  const DistanceScan scan = scan_distances(x, prob);
  if (scan.d_max == ExtReal(0.0)) return smallest_donor(x, prob, stall_offset);
  const ExtReal threshold = scan.d_max.scaled(tau);
  for (Index h = 0; h < prob.n; ++h) {
    if (prob.bounds.nearest_bound_distance(h, x[h]) >= threshold) return h;
  }
  return scan.argmax;  // unreachable: argmax passes its own threshold
}

Index select_argmax_impl(const Vec& x, const Problem& prob, Index stall_offset) {
  const DistanceScan scan = scan_distances(x, prob);
  if (scan.d_max == ExtReal(0.0)) return smallest_donor(x, prob, stall_offset);
  return scan.argmax;
}

}  // namespace

const char* terminal_status_name(TerminalStatus s) {
  switch (s) {
    case TerminalStatus::Converged: return "Converged";
    case TerminalStatus::MaxOuter: return "MaxOuter";
    case TerminalStatus::NumericalFailure: return "NumericalFailure";
  }
  return "Unknown";
}

void validate(const Ac2cdConfig& cfg, const Problem& prob) {
  if (!(cfg.tau > 0.0 && cfg.tau <= 1.0)) {
    throw Error(ErrorCode::ConfigError, "tau must lie in (0,1]");
  }
  if (cfg.index_rule == IndexRule::RateMode && !(cfg.tau < 1.0)) {
    throw Error(ErrorCode::ConfigError, "rate-mode index rule requires tau < 1");
  }
  if (cfg.index_rule == IndexRule::Fixed &&
      (cfg.fixed_index < 0 || cfg.fixed_index >= prob.n)) {
    throw Error(ErrorCode::ConfigError, "fixed index out of range");
  }
  if (!(cfg.epsilon > 0.0)) throw Error(ErrorCode::ConfigError, "epsilon must be positive");
  if (cfg.max_outer < 1) throw Error(ErrorCode::ConfigError, "max_outer must be positive");
  validate(cfg.stepsize);
  if (std::holds_alternative<QuadraticExactRule>(cfg.stepsize) &&
      !prob.objective->is_quadratic()) {
    throw Error(ErrorCode::ConfigError, "quadratic stepsize rule needs a quadratic objective");
  }
}

Index select_index_threshold(const Vec& x, double tau, const Problem& prob) {
  return select_threshold_impl(x, tau, prob, 0);
}

Index select_index_rate_mode(const Vec& x, Index j_prev, double tau, const Problem& prob) {
  const DistanceScan scan = scan_distances(x, prob);
  if (scan.d_max == ExtReal(0.0)) return smallest_donor(x, prob, 0);
  if (prob.bounds.nearest_bound_distance(j_prev, x[j_prev]) >= scan.d_max.scaled(tau)) {
    return j_prev;
  }
  return scan.argmax;
}

bool check_termination(double g_min, double g_max, double epsilon) {
  if (g_min == kInf || g_max == -kInf) return false;  // sentinel: nothing contributed
  return g_min - g_max >= -epsilon;
}

double stationarity_residual(const Vec& x, const Vec& grad, const Problem& prob) {
  double min_free = kInf;
  double max_held = -kInf;
  for (Index i = 0; i < prob.n; ++i) {
    if (below_upper(prob, x, i)) min_free = std::min(min_free, grad[i]);
    if (above_lower(prob, x, i)) max_held = std::max(max_held, grad[i]);
  }
  if (min_free == kInf || max_held == -kInf) return 0.0;  // one-sided: no condition
  return std::max(0.0, max_held - min_free);
}

bool final_sweep(const OracleState& state, const Problem& prob, double epsilon,
                 std::int64_t* partial_evals) {
  const Vec& z = state.point();
  double min_free = kInf;
  double max_held = -kInf;
  for (Index i = 0; i < prob.n; ++i) {
    const double gi = state.partial(i);
    if (below_upper(prob, z, i)) min_free = std::min(min_free, gi);
    if (above_lower(prob, z, i)) max_held = std::max(max_held, gi);
  }
  if (partial_evals != nullptr) *partial_evals += prob.n;
  if (min_free == kInf || max_held == -kInf) return true;
  return min_free - max_held >= -epsilon;
}

SweepStats run_inner_sweep(OracleState& state, const Problem& prob, const Ac2cdConfig& cfg,
                           Index j, const std::vector<Index>& perm, Index outer_k,
                           std::vector<InnerStepRecord>* records, InnerObserver* observer) {
  SweepStats stats;
  stats.g_min = kInf;
  stats.g_max = -kInf;
  const Objective& obj = *prob.objective;

  auto emit = [&](const InnerStepRecord& rec) {
    if (records != nullptr) records->push_back(rec);
    if (observer != nullptr) observer->on_inner_step(rec, state.point());
  };

  for (Index i = 0; i < prob.n; ++i) {
    const Index p = perm[static_cast<std::size_t>(i)];
    InnerStepRecord rec;
    rec.outer = outer_k;
    rec.inner = i;
    rec.p = p;
    rec.j = j;
    if (p == j) {
      rec.noop = true;
      emit(rec);
      continue;
    }

    const Vec& z = state.point();
    const bool p_up = below_upper(prob, z, p) && above_lower(prob, z, j);
    const bool p_down = above_lower(prob, z, p) && below_upper(prob, z, j);
    if (!p_up && !p_down) {
      // Both coordinates pinned: no feasible move in either direction, so the
      // partial derivatives are not computed at all.
      rec.skipped = true;
      emit(rec);
      continue;
    }

    const double grad_p = state.partial(p);
    const double grad_j = state.partial(j);
    stats.partial_evals += 2;
    if (below_upper(prob, z, p)) stats.g_min = std::min(stats.g_min, grad_p);
    if (above_lower(prob, z, p)) stats.g_max = std::max(stats.g_max, grad_p);
    if (below_upper(prob, z, j)) stats.g_min = std::min(stats.g_min, grad_j);
    if (above_lower(prob, z, j)) stats.g_max = std::max(stats.g_max, grad_j);

    const double g = grad_j - grad_p;
    rec.g = g;
    rec.alpha_max = max_feasible_stepsize(z, p, j, g, prob.bounds);
    // A difference below the relative float noise of the two partials carries
    // no descent signal; extend the g = 0 skip convention to it.
    const bool negligible =
        std::abs(g) <= 1e-14 * (1.0 + std::abs(grad_p) + std::abs(grad_j));
    if (!negligible && rec.alpha_max > ExtReal(0.0)) {
      StepResult step;
      if (const auto* armijo = std::get_if<ArmijoRule>(&cfg.stepsize)) {
        step = armijo_stepsize(state, p, j, g, rec.alpha_max, *armijo);
      } else if (const auto* lips = std::get_if<LipschitzRule>(&cfg.stepsize)) {
        const double lbar = lips->separable
                                ? (*lips->separable)[p] + (*lips->separable)[j]
                                : obj.pair_lipschitz(p, j);
        step.alpha = lipschitz_stepsize(rec.alpha_max, lips->gamma, lbar);
      } else if (const auto* quad = std::get_if<QuadraticExactRule>(&cfg.stepsize)) {
        step.alpha = quadratic_stepsize(obj.pair_curvature(p, j), rec.alpha_max, quad->a_upper);
      } else {
        step = exact_line_search(state, p, j, g, rec.alpha_max,
                                 std::get<ExactLineSearchRule>(cfg.stepsize));
      }
      stats.value_evals += step.value_evals;
      rec.alpha = step.alpha;
      if (step.alpha > 0.0) {
        state.apply_move(p, j, step.alpha * g);
        ++stats.pair_updates;
        for (const Index h : {p, j}) {
          const double clamped = prob.bounds.clamp_drift(h, state.point()[h], Problem::kBoundTol);
          if (clamped != state.point()[h]) state.clamp_coordinate(h, clamped);
        }
      }
    }
    emit(rec);
  }
  return stats;
}

SolveResult solve(const Problem& prob, const Vec& x0, const Ac2cdConfig& cfg,
                  InnerObserver* observer) {
  validate(cfg, prob);
  project_report_feasibility(x0, prob);

  SolveResult result;
  RunTrace& trace = result.trace;
  auto state = prob.objective->make_state(x0);
  const auto t_start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  };

  std::int64_t partials = 0;
  std::int64_t updates = 0;

  auto push_final = [&](Index k) {
    Vec grad(prob.n);
    for (Index i = 0; i < prob.n; ++i) grad[i] = state->partial(i);
    partials += prob.n;
    trace.final_kkt_residual = stationarity_residual(state->point(), grad, prob);
    trace.records.push_back(TraceRecord{.k = k,
                                        .objective = state->value(),
                                        .stationarity = trace.final_kkt_residual,
                                        .g_min = std::numeric_limits<double>::quiet_NaN(),
                                        .g_max = std::numeric_limits<double>::quiet_NaN(),
                                        .j = -1,
                                        .partial_evals = partials,
                                        .pair_updates = updates,
                                        .wall_time = elapsed()});
    result.x = state->point();
    result.objective = state->value();
  };

  if (prob.n < 2) {
    // A single variable is fully determined by the equality constraint.
    trace.status = TerminalStatus::Converged;
    trace.message = "no movable pair";
    push_final(0);
    return result;
  }

  Rng rng(cfg.rng_seed);
  std::vector<Index> perm(static_cast<std::size_t>(prob.n));
  std::iota(perm.begin(), perm.end(), Index{0});
  if (!cfg.shuffle_each_outer) rng.shuffle(perm);  // one seeded order, reused

  Index j_prev = -1;
  Index stall = 0;
  trace.status = TerminalStatus::MaxOuter;
  Index k = 0;
  for (; k < cfg.max_outer; ++k) {
    if (k > 0 && k % kCacheRefreshInterval == 0) state->refresh();
    const double f_k = state->value();
    if (!std::isfinite(f_k)) {
      trace.status = TerminalStatus::NumericalFailure;
      trace.message = "objective is not finite";
      break;
    }

    Index j = 0;
    try {
      switch (cfg.index_rule) {
        case IndexRule::Fixed:
          j = cfg.fixed_index;
          break;
        case IndexRule::ThresholdAny:
          j = select_threshold_impl(state->point(), cfg.tau, prob, stall);
          break;
        case IndexRule::RateMode:
          j = (j_prev < 0) ? select_argmax_impl(state->point(), prob, stall)
                           : select_index_rate_mode(state->point(), j_prev, cfg.tau, prob);
          if (stall > 0) j = select_argmax_impl(state->point(), prob, stall);
          break;
      }
    } catch (const Error& err) {
      trace.status = err.code() == ErrorCode::DegenerateLevelSet ? TerminalStatus::Converged
                                                                 : TerminalStatus::NumericalFailure;
      trace.message = err.what();
      break;
    }
    j_prev = j;
    if (cfg.shuffle_each_outer) rng.shuffle(perm);

    SweepStats stats;
    try {
      stats = run_inner_sweep(*state, prob, cfg, j, perm, k,
                              cfg.collect_inner_records ? &trace.inner : nullptr, observer);
    } catch (const Error& err) {
      trace.status = TerminalStatus::NumericalFailure;
      trace.message = err.what();
      break;
    }
    partials += stats.partial_evals;
    updates += stats.pair_updates;

    const bool no_info = stats.g_min == kInf && stats.g_max == -kInf;
    const double resid = no_info ? std::numeric_limits<double>::quiet_NaN()
                                 : std::max(0.0, stats.g_max - stats.g_min);
    trace.records.push_back(TraceRecord{.k = k,
                                        .objective = f_k,
                                        .stationarity = resid,
                                        .g_min = stats.g_min,
                                        .g_max = stats.g_max,
                                        .j = j,
                                        .partial_evals = partials,
                                        .pair_updates = updates,
                                        .wall_time = elapsed()});

    stall = stats.pair_updates == 0 ? stall + 1 : 0;

    if (check_termination(stats.g_min, stats.g_max, cfg.epsilon) &&
        final_sweep(*state, prob, cfg.epsilon, &partials)) {
      trace.status = TerminalStatus::Converged;
      ++k;
      break;
    }
    if (no_info) {
      // Nothing movable and nothing measurable: the point cannot change.
      trace.status = TerminalStatus::Converged;
      trace.message = "all working pairs pinned";
      ++k;
      break;
    }
  }

  push_final(k);
  return result;
}

}  // namespace ac2cd
