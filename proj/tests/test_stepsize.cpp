#include <doctest.h>

#include <functional>

#include "test_helpers.hpp"

using namespace ac2cd;
using testing::simplex_quadratic;
using testing::vertex;

namespace {

// Oracle that reports no decrease ever: Armijo backtracking must give up.
class InconsistentObjective final : public Objective {
 public:
  Index dim() const override { return 2; }
  double value(const Vec&) const override { return 0.0; }
  double partial(Index i, const Vec&) const override { return i == 0 ? 1.0 : 0.0; }
  double pair_move_value(const Vec&, Index, Index, double) const override { return 1.0; }
};

// Frozen oracle: scans c = 0, 1, 2, ... evaluating both sides of the
// sufficient-decrease inequality with plain formulas.
int armijo_scan(const std::function<double(double)>& phi, double f0, double dir_der, double trial,
                double delta, double gamma) {
  for (int c = 0;; ++c) {
    const double alpha = std::pow(delta, c) * trial;
    if (phi(alpha) <= f0 + gamma * alpha * dir_der) return c;
    REQUIRE(c < 100);
  }
}

}  // namespace

TEST_CASE("max feasible stepsize follows the sign of g") {
  const Bounds unit = Bounds::uniform(2, ExtReal(0.0), ExtReal(1.0));
  Vec z(2);
  z << 0.2, 0.5;
  CHECK(max_feasible_stepsize(z, 0, 1, 0.0, unit) == ExtReal(0.0));
  CHECK(max_feasible_stepsize(z, 0, 1, 2.0, unit).value() == doctest::Approx(0.25));

  const Bounds mixed({ExtReal(0.0), ExtReal(0.0)}, {ExtReal(1.0), ExtReal::pos_inf()});
  CHECK(max_feasible_stepsize(z, 0, 1, -2.0, mixed).value() == doctest::Approx(0.1));

  const Bounds free_bounds = Bounds::unbounded(2);
  CHECK(max_feasible_stepsize(z, 0, 1, 2.0, free_bounds).is_pos_inf());
}

TEST_CASE("armijo accepts the trial step when it already decreases enough") {
  const GeneratedInstance inst = simplex_quadratic(2);
  Vec z(2);
  z << 0.55, 0.45;
  auto state = inst.problem.objective->make_state(z);
  const double g = state->partial(1) - state->partial(0);  // -0.1
  const ExtReal amax = max_feasible_stepsize(z, 0, 1, g, inst.problem.bounds);
  CHECK(amax.value() == doctest::Approx(5.5));
  // Small trial cap: phi(0.25) = 0.250625 <= 0.2525 - 0.1 * 0.25 * 0.01.
  const ArmijoRule rule{0.5, 0.1, 0.25, 0.25};
  const StepResult res = armijo_stepsize(*state, 0, 1, g, amax, rule);
  CHECK(res.alpha == doctest::Approx(0.25));
  CHECK(res.value_evals == 1);
}

TEST_CASE("armijo backtrack count matches an independent scalar scan") {
  // f = (x0^2 + x1^2)/2 at z = (0.8, 0.2): g = 0.2 - 0.8 = -0.6, trial = 1.
  const GeneratedInstance inst = simplex_quadratic(2);
  Vec z(2);
  z << 0.8, 0.2;
  auto state = inst.problem.objective->make_state(z);
  const double g = state->partial(1) - state->partial(0);
  CHECK(g == doctest::Approx(-0.6));
  const ExtReal amax = max_feasible_stepsize(z, 0, 1, g, inst.problem.bounds);
  CHECK(amax.value() == doctest::Approx(0.8 / 0.6));

  const ArmijoRule rule{0.5, 0.1, 1.0, 1.0};
  const double trial = amax.min_with(rule.a_upper);
  auto phi = [&](double alpha) {
    const double a = 0.8 + alpha * g;
    const double b = 0.2 - alpha * g;
    return 0.5 * (a * a + b * b);
  };
  const int c_oracle = armijo_scan(phi, phi(0.0), -g * g, trial, rule.delta, rule.gamma);
  CHECK(c_oracle == 1);  // phi(1) = 0.34 fails, phi(0.5) = 0.25 passes

  const StepResult res = armijo_stepsize(*state, 0, 1, g, amax, rule);
  CHECK(res.alpha == doctest::Approx(std::pow(rule.delta, c_oracle) * trial));
  CHECK(res.value_evals == c_oracle + 1);
}

TEST_CASE("armijo reports an inconsistent oracle after 200 backtracks") {
  auto liar = std::make_shared<InconsistentObjective>();
  auto state = liar->make_state(Vec::Zero(2));
  CHECK_THROWS_WITH_AS(armijo_stepsize(*state, 0, 1, -1.0, ExtReal::pos_inf(), ArmijoRule{}),
                       doctest::Contains("BacktrackOverflow"), Error);
}

TEST_CASE("lipschitz stepsize closed form") {
  CHECK(lipschitz_stepsize(ExtReal::pos_inf(), 0.5, 2.0) == doctest::Approx(0.5));
  CHECK(lipschitz_stepsize(ExtReal(0.1), 0.5, 2.0) == doctest::Approx(0.1));
  CHECK(lipschitz_stepsize(ExtReal(0.0), 0.5, 2.0) == 0.0);
  CHECK_THROWS_AS(lipschitz_stepsize(ExtReal(1.0), 0.5, 0.0), Error);
}

TEST_CASE("quadratic stepsize: exact interior step and negative-curvature cap") {
  // Identity Hessian: kappa = 2 on any pair.
  const GeneratedInstance inst = simplex_quadratic(3);
  CHECK(inst.problem.objective->pair_curvature(0, 1) == doctest::Approx(2.0));
  CHECK(quadratic_stepsize(2.0, ExtReal::pos_inf(), 1e12) == doctest::Approx(0.5));
  CHECK(quadratic_stepsize(2.0, ExtReal(0.2), 1e12) == doctest::Approx(0.2));
  CHECK(quadratic_stepsize(-1.0, ExtReal(0.3), 1e12) == doctest::Approx(0.3));
  CHECK(quadratic_stepsize(-1.0, ExtReal::pos_inf(), 1e12) == doctest::Approx(1e12));
}

TEST_CASE("exact line search finds interior and boundary optima") {
  const GeneratedInstance inst = simplex_quadratic(2);
  const ExactLineSearchRule rule;

  // Interior minimizer: from (0.8, 0.2), kappa = 2 gives alpha* = 0.5.
  {
    Vec z(2);
    z << 0.8, 0.2;
    auto state = inst.problem.objective->make_state(z);
    const double g = -0.6;
    const StepResult res = exact_line_search(*state, 0, 1, g, ExtReal(0.8 / 0.6), rule);
    CHECK(res.alpha == doctest::Approx(0.5).epsilon(1e-8));
  }
  // Strictly decreasing on the interval: the boundary is returned exactly.
  {
    Vec z(2);
    z << 0.8, 0.2;
    auto state = inst.problem.objective->make_state(z);
    const double g = -0.6;
    const StepResult res = exact_line_search(*state, 0, 1, g, ExtReal(0.25), rule);
    CHECK(res.alpha == 0.25);
  }
  // Zero interval.
  {
    auto state = inst.problem.objective->make_state(vertex(2, 0));
    CHECK(exact_line_search(*state, 0, 1, -1.0, ExtReal(0.0), rule).alpha == 0.0);
  }
}

TEST_CASE("exact line search grows a bracket on unbounded intervals") {
  const GeneratedInstance inst = gen_logexp(4, 77, 2);
  auto state = inst.problem.objective->make_state(Vec::Zero(4));
  const double g = state->partial(1) - state->partial(0);
  REQUIRE(std::abs(g) > 1e-12);
  const StepResult res =
      exact_line_search(*state, 0, 1, g, ExtReal::pos_inf(), ExactLineSearchRule{});
  // The returned point is a scalar stationary point of phi.
  const double h = 1e-6 * (1.0 + res.alpha);
  const double der = (state->move_value(0, 1, (res.alpha + h) * g) -
                      state->move_value(0, 1, (res.alpha - h) * g)) /
                     (2.0 * h);
  CHECK(std::abs(der) <= 1e-4 * (1.0 + g * g));
}

// Stepsize Condition contracts, randomized over all four rules. Descent is
// checked with a small float-drift allowance; the inequalities themselves are
// exact-arithmetic statements.
TEST_CASE("stepsize contracts hold over randomized inner steps") {
  const GeneratedInstance cheb = gen_chebyshev(20, 8, 42);
  const GeneratedInstance logexp = gen_logexp(20, 43, 2);
  const GeneratedInstance noncvx = gen_nonconvex(20, 12, 0.5, 44);

  const ArmijoRule armijo{0.5, 0.1, 1.0, 1.0};
  const std::vector<StepsizeRule> rules = {armijo, LipschitzRule{0.5, std::nullopt},
                                           QuadraticExactRule{1e12}, ExactLineSearchRule{}};
  Rng rng(7);
  for (const auto& rule : rules) {
    for (const auto* inst : {&cheb, &logexp, &noncvx}) {
      if (std::holds_alternative<QuadraticExactRule>(rule) &&
          !inst->problem.objective->is_quadratic()) {
        continue;
      }
      if (std::holds_alternative<ExactLineSearchRule>(rule) &&
          inst->family == Family::NonconvexSimplex) {
        continue;  // exact search contract needs convexity along the segment
      }
      auto state = inst->problem.objective->make_state(random_feasible_point(*inst, 1234));
      int steps = 0;
      for (int trial = 0; steps < 900 && trial < 4000; ++trial) {
        const auto p = static_cast<Index>(rng.below(static_cast<std::uint64_t>(inst->n)));
        const auto j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(inst->n)));
        if (p == j) continue;
        const Vec z = state->point();
        const double grad_p = state->partial(p);
        const double grad_j = state->partial(j);
        const double g = grad_j - grad_p;
        if (std::abs(g) <= 1e-14 * (1.0 + std::abs(grad_p) + std::abs(grad_j))) continue;
        const ExtReal amax = max_feasible_stepsize(z, p, j, g, inst->problem.bounds);
        if (!(amax > ExtReal(0.0))) continue;
        ++steps;

        const double f0 = state->value();
        double alpha = 0.0;
        if (const auto* ar = std::get_if<ArmijoRule>(&rule)) {
          alpha = armijo_stepsize(*state, p, j, g, amax, *ar).alpha;
        } else if (const auto* lr = std::get_if<LipschitzRule>(&rule)) {
          alpha =
              lipschitz_stepsize(amax, lr->gamma, inst->problem.objective->pair_lipschitz(p, j));
        } else if (const auto* qr = std::get_if<QuadraticExactRule>(&rule)) {
          alpha = quadratic_stepsize(inst->problem.objective->pair_curvature(p, j), amax,
                                     qr->a_upper);
        } else {
          alpha =
              exact_line_search(*state, p, j, g, amax, std::get<ExactLineSearchRule>(rule)).alpha;
        }

        CHECK(alpha >= 0.0);
        CHECK(ExtReal(alpha) <= amax);
        if (alpha == 0.0) continue;
        state->apply_move(p, j, alpha * g);
        const double f1 = state->value();
        CHECK(f1 <= f0 + 1e-12 * (1.0 + std::abs(f0)));  // SC descent, drift allowance
        CHECK_NOTHROW(project_report_feasibility(state->point(), inst->problem));

        if (std::holds_alternative<ArmijoRule>(rule)) {
          // Forcing inequality with sigma = gamma / (2 A_u).
          const double move_sq = 2.0 * alpha * alpha * g * g;
          const double sigma = armijo.gamma / (2.0 * armijo.a_upper);
          CHECK(f1 <= f0 - sigma * move_sq + 1e-10 * (1.0 + std::abs(f0)));
        }
        if (std::holds_alternative<LipschitzRule>(rule)) {
          // The closed-form step satisfies the Armijo inequality with c = 0.
          CHECK(f1 <= f0 - 0.5 * alpha * g * g + 1e-10 * (1.0 + std::abs(f0)));
        }
      }
      CHECK(steps >= 100);
    }
  }
}

TEST_CASE("exact line search decreases at least as much as armijo") {
  const GeneratedInstance inst = gen_chebyshev(16, 6, 91);
  Rng rng(13);
  int done = 0;
  for (int trial = 0; trial < 300 && done < 60; ++trial) {
    const Vec z = random_feasible_point(inst, 700 + trial);
    const auto p = static_cast<Index>(rng.below(16));
    const auto j = static_cast<Index>(rng.below(16));
    if (p == j) continue;
    auto state = inst.problem.objective->make_state(z);
    const double g = state->partial(j) - state->partial(p);
    if (std::abs(g) < 1e-10) continue;
    const ExtReal amax = max_feasible_stepsize(z, p, j, g, inst.problem.bounds);
    if (!(amax > ExtReal(0.0))) continue;
    ++done;
    const double exact_alpha =
        exact_line_search(*state, p, j, g, amax, ExactLineSearchRule{}).alpha;
    const double armijo_alpha =
        armijo_stepsize(*state, p, j, g, amax, ArmijoRule{0.5, 0.1, 1.0, 1.0}).alpha;
    const double f_exact = state->move_value(p, j, exact_alpha * g);
    const double f_armijo = state->move_value(p, j, armijo_alpha * g);
    CHECK(f_exact <= f_armijo + 1e-12 * (1.0 + std::abs(f_armijo)));
  }
  CHECK(done >= 30);
}

TEST_CASE("directional derivative identity grad(f)^T d = -g^2") {
  const GeneratedInstance inst = gen_logexp(12, 55, 1);
  Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    const Vec x = random_feasible_point(inst, 800 + t);
    const auto p = static_cast<Index>(rng.below(12));
    const auto j = static_cast<Index>(rng.below(12));
    if (p == j) continue;
    const Vec grad = inst.problem.objective->gradient(x);
    const double g = grad[j] - grad[p];
    const double dot = grad[p] * g - grad[j] * g;  // grad^T (g (e_p - e_j))
    CHECK(dot == doctest::Approx(-g * g).epsilon(1e-10));
  }
}
