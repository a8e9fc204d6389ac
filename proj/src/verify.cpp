#include "ac2cd/verify.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace ac2cd {

namespace {
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
}

double brute_force_line_search(const Problem& prob, const Vec& z, Index p, Index j, double g,
                               double alpha_max, Index grid_points) {
  if (!(alpha_max > 0.0) || g == 0.0) return 0.0;
  const Objective& obj = *prob.objective;
  auto phi = [&](double alpha) { return obj.pair_move_value(z, p, j, alpha * g); };

  double best_alpha = 0.0;
  double best_val = obj.value(z);
  Index best_k = 0;
  for (Index k = 1; k <= grid_points; ++k) {
    const double alpha = alpha_max * static_cast<double>(k) / static_cast<double>(grid_points);
    const double v = phi(alpha);
    if (v < best_val) {
      best_val = v;
      best_alpha = alpha;
      best_k = k;
    }
  }
  // Ternary refinement inside the bracketing cells.
  const double h = alpha_max / static_cast<double>(grid_points);
  double lo = std::max(0.0, best_alpha - h);
  double hi = std::min(alpha_max, static_cast<double>(best_k) * h + h);
  for (int it = 0; it < 200 && hi - lo > 1e-14 * alpha_max; ++it) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (phi(m1) <= phi(m2)) {
      hi = m2;
    } else {
      lo = m1;
    }
  }
  const double mid = 0.5 * (lo + hi);
  return phi(mid) <= best_val ? mid : best_alpha;
}

TransformedProblem::TransformedProblem(const Problem& source, Index jbar)
    : source_(source), jbar_(jbar) {
  if (source.n < 2 || jbar < 0 || jbar >= source.n) {
    throw Error(ErrorCode::ConfigError, "transformed problem needs n >= 2 and a valid index");
  }
}

Vec TransformedProblem::to_x(const Vec& y) const {
  Vec x(source_.n);
  double acc = 0.0;
  for (Index t = 0; t < dim(); ++t) {
    x[x_index(t)] = y[t];
    acc += y[t];
  }
  x[jbar_] = source_.level - acc;
  return x;
}

Vec TransformedProblem::to_y(const Vec& x) const {
  Vec y(dim());
  for (Index t = 0; t < dim(); ++t) y[t] = x[x_index(t)];
  return y;
}

double TransformedProblem::psi_partial(Index yi, const Vec& y) const {
  const Vec x = to_x(y);
  const Objective& obj = *source_.objective;
  return obj.partial(x_index(yi), x) - obj.partial(jbar_, x);
}

Vec TransformedProblem::psi_gradient(const Vec& y) const {
  const Vec x = to_x(y);
  const Vec g = source_.objective->gradient(x);
  Vec out(dim());
  for (Index t = 0; t < dim(); ++t) out[t] = g[x_index(t)] - g[jbar_];
  return out;
}

namespace {

// Captures every inner step of a solver run for offline replay.
class StepCollector final : public InnerObserver {
 public:
  struct Step {
    InnerStepRecord rec;
    Vec z_after;
  };
  void on_inner_step(const InnerStepRecord& rec, const Vec& z_after) override {
    steps.push_back(Step{rec, z_after});
  }
  std::vector<Step> steps;
};

}  // namespace

double trajectory_equivalence_check(const Problem& prob, Index jbar, Index sweep_count,
                                    std::uint64_t seed) {
  for (Index i = 0; i < prob.n; ++i) {
    if (prob.bounds.lower(i).finite() || prob.bounds.upper(i).finite()) {
      throw Error(ErrorCode::ConfigError, "trajectory check needs an unbounded problem");
    }
  }
  Vec x0 = Vec::Zero(prob.n);
  if (prob.level != 0.0) x0[0] = prob.level;

  Ac2cdConfig cfg;
  cfg.index_rule = IndexRule::Fixed;
  cfg.fixed_index = jbar;
  cfg.stepsize = LipschitzRule{0.5, std::nullopt};  // alpha = 1/Lbar with no bounds
  cfg.epsilon = std::numeric_limits<double>::denorm_min();
  cfg.max_outer = sweep_count;
  cfg.rng_seed = seed;
  cfg.shuffle_each_outer = false;  // one seeded permutation shared by both sides

  StepCollector collector;
  solve(prob, x0, cfg, &collector);

  const TransformedProblem tp(prob, jbar);
  Vec y = tp.to_y(x0);
  double max_dev = 0.0;
  for (const auto& step : collector.steps) {
    const auto& rec = step.rec;
    if (!rec.noop && !rec.skipped && rec.alpha > 0.0) {
      const Index yi = rec.p < jbar ? rec.p : rec.p - 1;
      const double lbar = prob.objective->pair_lipschitz(rec.p, jbar);
      y[yi] -= (1.0 / lbar) * tp.psi_partial(yi, y);
    }
    const Vec x_side = tp.to_x(y);
    max_dev = std::max(max_dev, (x_side - step.z_after).cwiseAbs().maxCoeff());
  }
  return max_dev;
}

ScalarDualSolution logexp_optimum(const SeparableLogExp& obj, double level) {
  const Index n = obj.dim();
  // x_i(lambda) solves f_i'(x) = lambda; strictly increasing with slope >= a_i.
  auto coordinate = [&](Index i, double lambda) {
    const double b = obj.b()[i];
    const double a = obj.a()[i];
    double lo = obj.c()[i] + (lambda - std::max(0.0, b)) / a;
    double hi = obj.c()[i] + (lambda - std::min(0.0, b)) / a;
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
      const double resid = obj.term_derivative(i, x) - lambda;
      if (resid > 0.0) {
        hi = x;
      } else {
        lo = x;
      }
      const double newton = x - resid / obj.term_second_derivative(i, x);
      x = (newton > lo && newton < hi) ? newton : 0.5 * (lo + hi);
      if (hi - lo <= 1e-15 * (1.0 + std::abs(x))) break;
    }
    return x;
  };
  auto residual = [&](double lambda) {
    double acc = 0.0;
    for (Index i = 0; i < n; ++i) acc += coordinate(i, lambda);
    return acc - level;
  };

  double lo = -1.0, hi = 1.0;
  int guard = 0;
  while (residual(lo) > 0.0) {
    lo *= 2.0;
    if (++guard > 200) throw Error(ErrorCode::OptimumUnavailable, "multiplier bracket failed");
  }
  while (residual(hi) < 0.0) {
    hi *= 2.0;
    if (++guard > 200) throw Error(ErrorCode::OptimumUnavailable, "multiplier bracket failed");
  }
  double lambda = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double r = residual(lambda);
    if (r > 0.0) {
      hi = lambda;
    } else {
      lo = lambda;
    }
    // Newton on S(lambda): S' = sum 1/f_i''(x_i(lambda)).
    double slope = 0.0;
    for (Index i = 0; i < n; ++i) {
      slope += 1.0 / obj.term_second_derivative(i, coordinate(i, lambda));
    }
    const double newton = lambda - r / slope;
    lambda = (newton > lo && newton < hi) ? newton : 0.5 * (lo + hi);
    if (std::abs(r) <= 1e-14 * (1.0 + std::abs(level)) && hi - lo <= 1e-12 * (1.0 + std::abs(lambda))) {
      break;
    }
  }

  ScalarDualSolution sol;
  sol.lambda = lambda;
  sol.x_star = Vec(n);
  for (Index i = 0; i < n; ++i) sol.x_star[i] = coordinate(i, lambda);
  sol.f_star = obj.value(sol.x_star);
  return sol;
}

double rate_bound_constant(const SeparableLogExp& obj, Index jbar) {
  const Vec& lips = obj.coordinate_lipschitz();
  const Index n = obj.dim();
  double lmin = std::numeric_limits<double>::infinity();
  double lmax = 0.0;
  double lsum = 0.0;
  for (Index i = 0; i < n; ++i) {
    if (i == jbar) continue;
    const double pair = lips[i] + lips[jbar];
    lmin = std::min(lmin, pair);
    lmax = std::max(lmax, pair);
    lsum += pair;
  }
  const double mu = obj.strong_convexity();
  const double denom =
      2.0 * lmax * (1.0 + static_cast<double>(n - 1) * (lsum * lsum) / (lmin * lmin));
  return 1.0 - mu / denom;
}

namespace {

// Least-squares slope of log(gap) against k; returns exp(slope).
void fit_contraction(const std::vector<double>& gaps, RateReport& report) {
  const Index count = static_cast<Index>(gaps.size());
  report.window = count;
  if (count < 2) return;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (Index k = 0; k < count; ++k) {
    const double x = static_cast<double>(k);
    const double y = std::log(gaps[static_cast<std::size_t>(k)]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double nn = static_cast<double>(count);
  const double slope = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / nn;
  double ss = 0.0;
  for (Index k = 0; k < count; ++k) {
    const double pred = intercept + slope * static_cast<double>(k);
    const double err = std::log(gaps[static_cast<std::size_t>(k)]) - pred;
    ss += err * err;
  }
  report.c_hat = std::exp(slope);
  report.fit_residual = std::sqrt(ss / nn);
}

std::vector<double> usable_gaps(const std::vector<TraceRecord>& records, double f_star,
                                double floor) {
  std::vector<double> gaps;
  for (const auto& rec : records) {
    const double gap = rec.objective - f_star;
    if (gap < floor) break;  // below the float noise floor, ratios are meaningless
    gaps.push_back(gap);
  }
  return gaps;
}

}  // namespace

RateReport rate_bound_check(const GeneratedInstance& inst, Index jbar, Index max_outer,
                            std::uint64_t run_seed) {
  if (!inst.separable) {
    throw Error(ErrorCode::ConfigError, "rate bound check needs a separable instance");
  }
  RateReport report;
  report.c_bound = rate_bound_constant(*inst.separable, jbar);
  const ScalarDualSolution sol = logexp_optimum(*inst.separable, inst.problem.level);
  report.f_star = sol.f_star;

  Ac2cdConfig cfg;
  cfg.index_rule = IndexRule::Fixed;
  cfg.fixed_index = jbar;
  cfg.stepsize = LipschitzRule{0.5, std::nullopt};
  cfg.epsilon = 1e-9;
  cfg.max_outer = max_outer;
  cfg.rng_seed = run_seed;
  const SolveResult res = solve(inst.problem, Vec::Zero(inst.n), cfg);

  const double floor = 1e-10 * (1.0 + std::abs(sol.f_star));
  const std::vector<double> gaps = usable_gaps(res.trace.records, sol.f_star, floor);
  report.per_step_ok = true;  // vacuous when the run converges within a sweep
  report.max_ratio = 0.0;
  for (std::size_t k = 0; k + 1 < gaps.size(); ++k) {
    const double ratio = gaps[k + 1] / gaps[k];
    report.max_ratio = std::max(report.max_ratio, ratio);
    if (!(gaps[k + 1] <= report.c_bound * gaps[k])) report.per_step_ok = false;
  }
  const Index tail = std::min<Index>(50, static_cast<Index>(gaps.size()));
  if (tail >= 2) {
    std::vector<double> window(gaps.end() - tail, gaps.end());
    fit_contraction(window, report);
  } else {
    report.c_hat = 0.0;  // the gap fell below the noise floor immediately
    report.window = tail;
  }
  report.stabilized = true;
  report.stable_j = jbar;
  report.interior = true;
  return report;
}

RateReport asymptotic_rate_check(const GeneratedInstance& inst, std::uint64_t run_seed) {
  RateReport report;

  Ac2cdConfig reference_cfg;
  reference_cfg.index_rule = IndexRule::RateMode;
  reference_cfg.stepsize = ExactLineSearchRule{};
  reference_cfg.epsilon = 1e-12;
  reference_cfg.max_outer = 200000;
  reference_cfg.rng_seed = run_seed + 1;
  const Vec x0 = inst.default_start(run_seed);
  const double f_star = solve(inst.problem, x0, reference_cfg).objective;
  report.f_star = f_star;

  Ac2cdConfig cfg = reference_cfg;
  cfg.epsilon = 1e-8;
  cfg.rng_seed = run_seed;
  cfg.collect_inner_records = false;
  const SolveResult res = solve(inst.problem, x0, cfg);

  // j(k) stabilization: the sticky rule must settle on one index.
  std::vector<Index> inner_j;
  for (const auto& rec : res.trace.records) {
    if (rec.j >= 0) inner_j.push_back(rec.j);
  }
  Index last_change = 0;
  for (std::size_t k = 1; k < inner_j.size(); ++k) {
    if (inner_j[k] != inner_j[k - 1]) last_change = static_cast<Index>(k);
  }
  report.stabilized =
      !inner_j.empty() && last_change + 5 < static_cast<Index>(inner_j.size());
  report.stable_j = inner_j.empty() ? -1 : inner_j.back();
  if (report.stable_j >= 0) {
    const ExtReal l = inst.problem.bounds.lower(report.stable_j);
    const ExtReal u = inst.problem.bounds.upper(report.stable_j);
    const double xj = res.x[report.stable_j];
    report.interior = (!l.finite() || xj > l.value()) && (!u.finite() || xj < u.value());
  }

  const double floor = 1e-12 * (1.0 + std::abs(f_star));
  const std::vector<double> gaps = usable_gaps(res.trace.records, f_star, floor);
  const Index tail = std::min<Index>(50, static_cast<Index>(gaps.size()));
  if (tail >= 2) {
    std::vector<double> window(gaps.end() - tail, gaps.end());
    fit_contraction(window, report);
    report.per_step_ok = true;
    report.max_ratio = 0.0;
    for (std::size_t k = 0; k + 1 < gaps.size(); ++k) {
      report.max_ratio = std::max(report.max_ratio, gaps[k + 1] / gaps[k]);
    }
  }
  return report;
}

Vec finite_diff_gradient(const Problem& prob, const Vec& x, double h) {
  const Objective& obj = *prob.objective;
  Vec g(prob.n);
  Vec y = x;
  for (Index i = 0; i < prob.n; ++i) {
    const double step = h * (1.0 + std::abs(x[i]));
    y[i] = x[i] + step;
    const double fp = obj.value(y);
    y[i] = x[i] - step;
    const double fm = obj.value(y);
    y[i] = x[i];
    g[i] = (fp - fm) / (2.0 * step);
  }
  return g;
}

EigenStats eigen_stats(const StructuredQuadratic& quad, Index max_n) {
  const Index n = quad.dim();
  if (n > max_n) {
    throw Error(ErrorCode::ConfigError, "eigen statistics are limited to small instances");
  }
  Eigen::MatrixXd dense_q = quad.sparse() ? Eigen::MatrixXd(quad.sparse_matrix())
                                          : quad.dense_matrix();
  const Eigen::MatrixXd h =
      dense_q.transpose() * quad.diagonal().asDiagonal() * dense_q;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
  EigenStats stats;
  const Vec& ev = solver.eigenvalues();
  stats.lambda_min = ev.minCoeff();
  stats.lambda_max = ev.maxCoeff();
  const double tol = 1e-10 * std::max(std::abs(stats.lambda_min), std::abs(stats.lambda_max));
  for (Index i = 0; i < n; ++i) {
    if (ev[i] < -tol) ++stats.n_neg;
    if (ev[i] > tol) ++stats.n_pos;
  }
  return stats;
}

}  // namespace ac2cd
