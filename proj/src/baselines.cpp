#include "ac2cd/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace ac2cd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr Index kRefreshInterval = 1000;

bool below_upper(const Problem& prob, const Vec& z, Index i) {
  const ExtReal u = prob.bounds.upper(i);
  return !u.finite() || z[i] < u.value();
}

bool above_lower(const Problem& prob, const Vec& z, Index i) {
  const ExtReal l = prob.bounds.lower(i);
  return !l.finite() || z[i] > l.value();
}

void clamp_pair(OracleState& state, const Problem& prob, Index i, Index j) {
  for (const Index h : {i, j}) {
    const double clamped = prob.bounds.clamp_drift(h, state.point()[h], Problem::kBoundTol);
    if (clamped != state.point()[h]) state.clamp_coordinate(h, clamped);
  }
}

}  // namespace

std::pair<Index, Index> decode_pair_uniform(std::uint64_t r_floor, Index n) {
  if (n < 2) throw Error(ErrorCode::ConfigError, "pair sampling needs n >= 2");
  const double r = static_cast<double>(r_floor);
  const auto i1 =
      1 + static_cast<std::uint64_t>(std::floor((std::sqrt(1.0 + 8.0 * r) + 1.0) / 2.0));
  const auto j1 = 1 + r_floor - (i1 - 2) * (i1 - 1) / 2;
  return {static_cast<Index>(i1) - 1, static_cast<Index>(j1) - 1};
}

PairSampler PairSampler::uniform(Index n) {
  if (n < 2) throw Error(ErrorCode::ConfigError, "pair sampling needs n >= 2");
  return PairSampler(n);
}

PairSampler PairSampler::lipschitz_weighted(const Vec& lips) {
  const Index n = lips.size();
  if (n < 2) throw Error(ErrorCode::ConfigError, "pair sampling needs n >= 2");
  if (n > 20000) {
    throw Error(ErrorCode::ConfigError,
                "weighted sampler stores all pair weights; limited to n <= 20000");
  }
  PairSampler sampler(n);
  const std::size_t pairs = static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2;
  sampler.cumulative_.resize(pairs);
  double acc = 0.0;
  std::size_t t = 0;
  // Triangular order matching decode_pair_uniform: (1,0), (2,0), (2,1), ...
  for (Index i = 1; i < n; ++i) {
    for (Index j = 0; j < i; ++j) {
      if (!(lips[i] > 0.0 && lips[j] > 0.0)) {
        throw Error(ErrorCode::ConfigError, "weighted sampler needs positive constants");
      }
      acc += 1.0 / lips[i] + 1.0 / lips[j];
      sampler.cumulative_[t++] = acc;
    }
  }
  return sampler;
}

std::pair<Index, Index> PairSampler::sample(Rng& rng) const {
  if (cumulative_.empty()) {
    const double total = static_cast<double>(n_) * static_cast<double>(n_ - 1) / 2.0;
    const auto r_floor = static_cast<std::uint64_t>(rng.uniform() * total);
    return decode_pair_uniform(r_floor, n_);
  }
  const double u = rng.uniform() * cumulative_.back();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const auto t = static_cast<std::uint64_t>(std::distance(cumulative_.begin(), it));
  return decode_pair_uniform(std::min<std::uint64_t>(t, cumulative_.size() - 1), n_);
}

double PairSampler::pair_probability(Index i, Index j) const {
  if (i < j) std::swap(i, j);
  if (cumulative_.empty()) return 2.0 / (static_cast<double>(n_) * static_cast<double>(n_ - 1));
  const std::size_t t = static_cast<std::size_t>(i) * (static_cast<std::size_t>(i) - 1) / 2 +
                        static_cast<std::size_t>(j);
  const double lo = t == 0 ? 0.0 : cumulative_[t - 1];
  return (cumulative_[t] - lo) / cumulative_.back();
}

const char* baseline_method_name(BaselineMethod m) {
  switch (m) {
    case BaselineMethod::RcdUniform: return "rcd-unif";
    case BaselineMethod::RcdLipschitz: return "rcd-lips";
    case BaselineMethod::Mvp: return "mvp";
  }
  return "unknown";
}

RcdStepOutcome rcd_step(OracleState& state, const Problem& prob, Index i, Index j, double gamma,
                        double a_upper) {
  RcdStepOutcome out;
  const Vec& z = state.point();
  const bool can_up = below_upper(prob, z, i) && above_lower(prob, z, j);
  const bool can_down = above_lower(prob, z, i) && below_upper(prob, z, j);
  if (!can_up && !can_down) {
    out.skipped = true;
    return out;
  }
  out.grad_i = state.partial(i);
  out.grad_j = state.partial(j);
  const double g = out.grad_j - out.grad_i;
  if (std::abs(g) <= 1e-14 * (1.0 + std::abs(out.grad_i) + std::abs(out.grad_j))) return out;
  const ExtReal alpha_max = max_feasible_stepsize(z, i, j, g, prob.bounds);
  if (!(alpha_max > ExtReal(0.0))) return out;
  const Objective& obj = *prob.objective;
  const double alpha = obj.is_quadratic()
                           ? quadratic_stepsize(obj.pair_curvature(i, j), alpha_max, a_upper)
                           : lipschitz_stepsize(alpha_max, gamma, obj.pair_lipschitz(i, j));
  if (alpha > 0.0) {
    state.apply_move(i, j, alpha * g);
    clamp_pair(state, prob, i, j);
    out.moved = true;
  }
  return out;
}

MvpStepOutcome mvp_step(OracleState& state, const Problem& prob, double epsilon,
                        const ExactLineSearchRule& ls, std::int64_t* partial_evals) {
  MvpStepOutcome out;
  const Vec& z = state.point();
  double min_free = kInf, max_held = -kInf;
  for (Index i = 0; i < prob.n; ++i) {
    const double gi = state.partial(i);
    if (below_upper(prob, z, i) && gi < min_free) {
      min_free = gi;
      out.p = i;
    }
    if (above_lower(prob, z, i) && gi > max_held) {
      max_held = gi;
      out.j = i;
    }
  }
  if (partial_evals != nullptr) *partial_evals += prob.n;
  if (out.p < 0 || out.j < 0) {
    throw Error(ErrorCode::EmptyIndexSet, "no coordinate strictly below/above its bound");
  }
  out.min_free = min_free;
  out.max_held = max_held;
  out.violation = max_held - min_free;
  if (min_free - max_held >= -epsilon) {
    out.stationary = true;
    return out;
  }
  const double g = max_held - min_free;  // grad_j - grad_p > 0
  const ExtReal alpha_max = max_feasible_stepsize(z, out.p, out.j, g, prob.bounds);
  if (!(alpha_max > ExtReal(0.0))) {
    out.stationary = true;  // most violating pair cannot move: treat as terminal
    return out;
  }
  const double alpha = exact_line_search(state, out.p, out.j, g, alpha_max, ls).alpha;
  if (alpha > 0.0) {
    state.apply_move(out.p, out.j, alpha * g);
    clamp_pair(state, prob, out.p, out.j);
    out.moved = true;
  }
  return out;
}

SolveResult run_baseline(const Problem& prob, const Vec& x0, const BaselineConfig& cfg,
                         const StopPolicy& stop) {
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

  auto target_reached = [&](double f) {
    return stop.f_target &&
           (f - *stop.f_target) / (1.0 + std::abs(*stop.f_target)) <= stop.nu;
  };
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

  trace.status = TerminalStatus::MaxOuter;

  if (target_reached(state->value())) {
    trace.status = TerminalStatus::Converged;
    push_final(0);
    return result;
  }

  if (cfg.method == BaselineMethod::Mvp) {
    const double eps = stop.f_target ? 0.0 : stop.epsilon;
    for (Index k = 0; k < cfg.max_inner; ++k) {
      if (k > 0 && k % kRefreshInterval == 0) state->refresh();
      const double f_k = state->value();
      MvpStepOutcome out;
      try {
        out = mvp_step(*state, prob, eps, cfg.line_search, &partials);
      } catch (const Error& err) {
        trace.status = TerminalStatus::NumericalFailure;
        trace.message = err.what();
        break;
      }
      updates += out.moved ? 1 : 0;
      trace.records.push_back(TraceRecord{.k = k,
                                          .objective = f_k,
                                          .stationarity = std::max(0.0, out.violation),
                                          .g_min = out.min_free,
                                          .g_max = out.max_held,
                                          .j = out.j,
                                          .partial_evals = partials,
                                          .pair_updates = updates,
                                          .wall_time = elapsed()});
      if (out.stationary || target_reached(state->value())) {
        trace.status = TerminalStatus::Converged;
        push_final(k + 1);
        return result;
      }
      if (!out.moved) {
        trace.status = TerminalStatus::NumericalFailure;
        trace.message = "most violating pair produced a zero step";
        break;
      }
    }
    push_final(static_cast<Index>(trace.records.size()));
    return result;
  }

  // RCD: outer iteration = n inner samples, for cost parity with AC2CD.
  if (prob.n < 2) {
    trace.status = TerminalStatus::Converged;
    trace.message = "no movable pair";
    push_final(0);
    return result;
  }
  PairSampler sampler =
      cfg.method == BaselineMethod::RcdUniform
          ? PairSampler::uniform(prob.n)
          : PairSampler::lipschitz_weighted(prob.objective->coordinate_lipschitz_constants());
  const Index max_outer =
      static_cast<Index>((cfg.max_inner + prob.n - 1) / prob.n);
  Rng rng(cfg.rng_seed);
  for (Index k = 0; k < max_outer; ++k) {
    if (k > 0 && k % kRefreshInterval == 0) state->refresh();
    const double f_k = state->value();
    double g_min = kInf, g_max = -kInf;
    for (Index t = 0; t < prob.n; ++t) {
      const auto [i, j] = sampler.sample(rng);
      const Vec& z = state->point();
      const bool i_free_up = below_upper(prob, z, i);
      const bool i_held = above_lower(prob, z, i);
      const bool j_free_up = below_upper(prob, z, j);
      const bool j_held = above_lower(prob, z, j);
      const RcdStepOutcome out = rcd_step(*state, prob, i, j, cfg.gamma, cfg.a_upper);
      if (out.skipped) continue;
      partials += 2;
      if (i_free_up) g_min = std::min(g_min, out.grad_i);
      if (i_held) g_max = std::max(g_max, out.grad_i);
      if (j_free_up) g_min = std::min(g_min, out.grad_j);
      if (j_held) g_max = std::max(g_max, out.grad_j);
      updates += out.moved ? 1 : 0;
    }
    const bool no_info = g_min == kInf && g_max == -kInf;
    trace.records.push_back(
        TraceRecord{.k = k,
                    .objective = f_k,
                    .stationarity = no_info ? std::numeric_limits<double>::quiet_NaN()
                                            : std::max(0.0, g_max - g_min),
                    .g_min = g_min,
                    .g_max = g_max,
                    .j = -1,
                    .partial_evals = partials,
                    .pair_updates = updates,
                    .wall_time = elapsed()});
    if (stop.f_target) {
      if (target_reached(state->value())) {
        trace.status = TerminalStatus::Converged;
        push_final(k + 1);
        return result;
      }
    } else if (check_termination(g_min, g_max, stop.epsilon) &&
               final_sweep(*state, prob, stop.epsilon, &partials)) {
      trace.status = TerminalStatus::Converged;
      push_final(k + 1);
      return result;
    }
  }
  push_final(static_cast<Index>(trace.records.size()));
  return result;
}

}  // namespace ac2cd
