#pragma once

#include <optional>
#include <variant>

#include "ac2cd/problem.hpp"

namespace ac2cd {

// Armijo backtracking: alpha = delta^c * Delta with Delta = min{alpha_max, A},
// c the smallest integer giving sufficient decrease.
struct ArmijoRule {
  double delta = 0.5;
  double gamma = 0.1;
  double a_lower = 1.0;
  double a_upper = 1.0;
};

// Closed form min{alpha_max, 2(1-gamma)/Lbar}. Constants come from the
// objective unless a separable override is supplied.
struct LipschitzRule {
  double gamma = 0.5;
  std::optional<Vec> separable;  // Lbar_i; pair constant is Lbar_i + Lbar_j
};

// Exact minimizer 1/kappa on positive-curvature pair directions of a
// quadratic; min{alpha_max, a_upper} otherwise.
struct QuadraticExactRule {
  double a_upper = 1e12;
};

// Golden-section search over the feasible interval using value queries only.
struct ExactLineSearchRule {
  double tol = 1e-10;
  int max_evals = 200;
};

using StepsizeRule =
    std::variant<ArmijoRule, LipschitzRule, QuadraticExactRule, ExactLineSearchRule>;

void validate(const StepsizeRule& rule);
const char* stepsize_rule_name(const StepsizeRule& rule);

// Largest feasible stepsize along d = g (e_p - e_j) from z.
ExtReal max_feasible_stepsize(double z_p, double z_j, ExtReal l_p, ExtReal u_p, ExtReal l_j,
                              ExtReal u_j, double g);
ExtReal max_feasible_stepsize(const Vec& z, Index p, Index j, double g, const Bounds& bounds);

struct StepResult {
  double alpha = 0.0;
  int value_evals = 0;
};

// Preconditions: g != 0 and alpha_max > 0; callers record alpha = 0 otherwise.
StepResult armijo_stepsize(const OracleState& state, Index p, Index j, double g,
                           ExtReal alpha_max, const ArmijoRule& rule);

double lipschitz_stepsize(ExtReal alpha_max, double gamma, double lbar);

double quadratic_stepsize(double kappa, ExtReal alpha_max, double a_upper);

// Requires phi(alpha) = f(z + alpha d) unimodal on the interval (strict
// convexity along pair directions is enough). With alpha_max infinite a
// bracket is grown first, so f must be coercive along d.
StepResult exact_line_search(const OracleState& state, Index p, Index j, double g,
                             ExtReal alpha_max, const ExactLineSearchRule& rule);

}  // namespace ac2cd
