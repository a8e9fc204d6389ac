#include "ac2cd/stepsize.hpp"

#include <cmath>

namespace ac2cd {

namespace {

struct RuleValidator {
  void operator()(const ArmijoRule& r) const {
    if (!(r.delta > 0.0 && r.delta < 1.0)) {
      throw Error(ErrorCode::ConfigError, "armijo delta must lie in (0,1)");
    }
    if (!(r.gamma > 0.0 && r.gamma < 1.0)) {
      throw Error(ErrorCode::ConfigError, "armijo gamma must lie in (0,1)");
    }
    if (!(r.a_lower > 0.0 && r.a_lower <= r.a_upper && std::isfinite(r.a_upper))) {
      throw Error(ErrorCode::ConfigError, "armijo requires 0 < A_l <= A_u < inf");
    }
  }
  void operator()(const LipschitzRule& r) const {
    if (!(r.gamma > 0.0 && r.gamma < 1.0)) {
      throw Error(ErrorCode::ConfigError, "lipschitz gamma must lie in (0,1)");
    }
    if (r.separable) {
      for (Index i = 0; i < r.separable->size(); ++i) {
        if (!((*r.separable)[i] > 0.0)) {
          throw Error(ErrorCode::ConfigError, "lipschitz constants must be positive");
        }
      }
    }
  }
  void operator()(const QuadraticExactRule& r) const {
    if (!(r.a_upper > 0.0)) {
      throw Error(ErrorCode::ConfigError, "quadratic rule requires A_u > 0");
    }
  }
  void operator()(const ExactLineSearchRule& r) const {
    if (!(r.tol > 0.0) || r.max_evals < 8) {
      throw Error(ErrorCode::ConfigError, "exact line search needs tol > 0 and max_evals >= 8");
    }
  }
};

}  // namespace

void validate(const StepsizeRule& rule) { std::visit(RuleValidator{}, rule); }

const char* stepsize_rule_name(const StepsizeRule& rule) {
  switch (rule.index()) {
    case 0: return "armijo";
    case 1: return "lipschitz";
    case 2: return "quadratic";
    default: return "exact";
  }
}

ExtReal max_feasible_stepsize(double z_p, double z_j, ExtReal l_p, ExtReal u_p, ExtReal l_j,
                              ExtReal u_j, double g) {
  if (g == 0.0) return ExtReal(0.0);
  ExtReal gap = g > 0.0 ? min(gap_above(u_p, z_p), gap_below(z_j, l_j))
                        : min(gap_below(z_p, l_p), gap_above(u_j, z_j));
  if (gap.finite() && gap.value() < 0.0) gap = ExtReal(0.0);  // drift guard
  return gap.scaled(1.0 / std::abs(g));
}

ExtReal max_feasible_stepsize(const Vec& z, Index p, Index j, double g, const Bounds& bounds) {
  return max_feasible_stepsize(z[p], z[j], bounds.lower(p), bounds.upper(p), bounds.lower(j),
                               bounds.upper(j), g);
}

StepResult armijo_stepsize(const OracleState& state, Index p, Index j, double g,
                           ExtReal alpha_max, const ArmijoRule& rule) {
  constexpr int kMaxBacktracks = 200;
  const double trial = alpha_max.min_with(rule.a_upper);  // Delta = min{alpha_max, A}
  const double f0 = state.value();
  const double dir_der = -g * g;
  double alpha = trial;
  StepResult result;
  for (int c = 0; c <= kMaxBacktracks; ++c) {
    ++result.value_evals;
    if (state.move_value(p, j, alpha * g) <= f0 + rule.gamma * alpha * dir_der) {
      result.alpha = alpha;
      return result;
    }
    alpha *= rule.delta;
  }
  throw Error(ErrorCode::BacktrackOverflow,
              "no sufficient decrease after 200 backtracks; oracle is inconsistent");
}

double lipschitz_stepsize(ExtReal alpha_max, double gamma, double lbar) {
  if (!(lbar > 0.0)) {
    throw Error(ErrorCode::ConfigError, "lipschitz stepsize needs a positive constant");
  }
  return alpha_max.min_with(2.0 * (1.0 - gamma) / lbar);
}

double quadratic_stepsize(double kappa, ExtReal alpha_max, double a_upper) {
  return kappa > 0.0 ? alpha_max.min_with(1.0 / kappa) : alpha_max.min_with(a_upper);
}

StepResult exact_line_search(const OracleState& state, Index p, Index j, double g,
                             ExtReal alpha_max, const ExactLineSearchRule& rule) {
  StepResult result;
  auto phi = [&](double alpha) {
    ++result.value_evals;
    return state.move_value(p, j, alpha * g);
  };

  const double f0 = state.value();
  double hi;
  double f_hi;
  if (alpha_max.finite()) {
    hi = alpha_max.value();
    if (hi <= 0.0) return result;
    f_hi = phi(hi);
  } else {
    // Grow a bracket; valid for coercive phi (strictly convex families).
    hi = 1.0;
    f_hi = phi(hi);
    double f_half = f0;
    while (f_hi < f_half) {
      if (result.value_evals >= rule.max_evals) {
        throw Error(ErrorCode::MaxEvalsExceeded, "bracket growth exhausted the budget");
      }
      f_half = f_hi;
      hi *= 2.0;
      f_hi = phi(hi);
    }
  }

  const double inv_phi_ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  const double width_tol = hi * std::max(rule.tol, 1e-14);
  double lo = 0.0;
  double span = hi - lo;
  double m1 = hi - inv_phi_ratio * span;
  double m2 = lo + inv_phi_ratio * span;
  double f1 = phi(m1);
  double f2 = phi(m2);
  while (hi - lo > width_tol) {
    if (result.value_evals >= rule.max_evals) {
      throw Error(ErrorCode::MaxEvalsExceeded, "golden-section budget exhausted");
    }
    if (f1 <= f2) {
      hi = m2;
      m2 = m1;
      f2 = f1;
      m1 = hi - inv_phi_ratio * (hi - lo);
      f1 = phi(m1);
    } else {
      lo = m1;
      m1 = m2;
      f1 = f2;
      m2 = lo + inv_phi_ratio * (hi - lo);
      f2 = phi(m2);
    }
  }

  const double interior = 0.5 * (lo + hi);
  const double f_int = phi(interior);
  // Boundary optima are returned exactly.
  result.alpha = interior;
  double best = f_int;
  if (f_hi <= best) {
    result.alpha = alpha_max.finite() ? alpha_max.value() : hi;
    best = f_hi;
  }
  if (f0 < best) result.alpha = 0.0;
  return result;
}

}  // namespace ac2cd
