#include <doctest.h>

#include "ac2cd/verify.hpp"
#include "test_helpers.hpp"

using namespace ac2cd;
using testing::simplex_quadratic;

namespace {

Problem two_var_simplex() { return simplex_quadratic(2).problem; }

}  // namespace

TEST_CASE("bounds require l < u and equal lengths") {
  CHECK_THROWS_AS(Bounds({ExtReal(0.0)}, {ExtReal(0.0)}), Error);
  CHECK_THROWS_AS(Bounds({ExtReal(1.0)}, {ExtReal(0.0)}), Error);
  CHECK_THROWS_AS(Bounds({ExtReal(0.0), ExtReal(0.0)}, {ExtReal(1.0)}), Error);
  CHECK_NOTHROW(Bounds({ExtReal::neg_inf()}, {ExtReal::pos_inf()}));
}

TEST_CASE("feasibility check accepts exact points and reports violations") {
  const Problem prob = two_var_simplex();

  Vec ok(2);
  ok << 0.5, 0.5;
  CHECK_NOTHROW(project_report_feasibility(ok, prob));

  Vec bad_sum(2);
  bad_sum << 0.6, 0.5;
  CHECK_THROWS_WITH_AS(project_report_feasibility(bad_sum, prob),
                       doctest::Contains("InfeasibleEquality"), Error);

  Vec bad_bounds(2);
  bad_bounds << 1.2, -0.2;
  CHECK_THROWS_WITH_AS(project_report_feasibility(bad_bounds, prob),
                       doctest::Contains("BoundViolation"), Error);

  Vec wrong_dim(3);
  wrong_dim << 1.0, 0.0, 0.0;
  CHECK_THROWS_AS(project_report_feasibility(wrong_dim, prob), Error);
}

TEST_CASE("kkt residual on hand-checked index sets") {
  const Problem prob = two_var_simplex();

  // Symmetric stationary point: all partials equal.
  {
    const GeneratedInstance inst = simplex_quadratic(4);
    const Vec x = Vec::Constant(4, 0.25);
    const Vec grad = inst.problem.objective->gradient(x);
    CHECK(kkt_residual(x, grad, inst.problem) == 0.0);
  }
  // x = (1,0): free set {1} has grad 1, held set {0} has grad 2.
  {
    Vec x(2), grad(2);
    x << 1.0, 0.0;
    grad << 2.0, 1.0;
    CHECK(kkt_residual(x, grad, prob) == doctest::Approx(1.0).epsilon(1e-15));
  }
  // x = (0,1): the vertex satisfies stationarity with a multiplier in [1,2].
  {
    Vec x(2), grad(2);
    x << 0.0, 1.0;
    grad << 2.0, 1.0;
    CHECK(kkt_residual(x, grad, prob) == 0.0);
  }
}

TEST_CASE("kkt residual reports a degenerate index set") {
  // Single variable pinned to its lower bound: nothing is strictly above l.
  auto quad = std::make_shared<StructuredQuadratic>(Eigen::MatrixXd::Identity(1, 1), Vec::Ones(1),
                                                    Vec::Zero(1));
  const Problem prob{1, 0.0, Bounds::uniform(1, ExtReal(0.0), ExtReal(1.0)), quad};
  Vec x(1), grad(1);
  x << 0.0;
  grad << 1.0;
  CHECK_THROWS_WITH_AS(kkt_residual(x, grad, prob), doctest::Contains("EmptyIndexSet"), Error);
}

TEST_CASE("kkt residual is invariant under gradient shifts") {
  const GeneratedInstance inst = gen_chebyshev(12, 5, 77);
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec x = random_feasible_point(inst, 100 + trial);
    Vec grad(inst.n);
    for (Index i = 0; i < inst.n; ++i) grad[i] = rng.uniform(-5.0, 5.0);
    const double base = kkt_residual(x, grad, inst.problem);
    const double c = rng.uniform(-10.0, 10.0);
    const double shifted = kkt_residual(x, Vec(grad.array() + c), inst.problem);
    CHECK(shifted == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("nearest bound distance") {
  const Problem box = two_var_simplex();
  Vec x(2);
  x << 0.3, 0.7;
  CHECK(nearest_bound_distance(x, 0, box).value() == doctest::Approx(0.3));
  x << 0.0, 1.0;
  CHECK(nearest_bound_distance(x, 0, box).value() == 0.0);

  const Problem free_prob{2, 0.0, Bounds::unbounded(2), box.objective};
  CHECK(nearest_bound_distance(x, 0, free_prob).is_pos_inf());

  // 1-Lipschitz in the coordinate.
  Rng rng(9);
  for (int t = 0; t < 200; ++t) {
    const double a = rng.uniform();
    const double b = rng.uniform();
    Vec xa(2), xb(2);
    xa << a, 1.0 - a;
    xb << b, 1.0 - b;
    const double da = nearest_bound_distance(xa, 0, box).value();
    const double db = nearest_bound_distance(xb, 0, box).value();
    CHECK(std::abs(da - db) <= std::abs(a - b) + 1e-15);
  }
}

TEST_CASE("pair moves preserve the equality constraint") {
  const GeneratedInstance inst = gen_chebyshev(20, 6, 5);
  auto state = inst.problem.objective->make_state(inst.default_start(1));
  Rng rng(11);
  for (int t = 0; t < 2000; ++t) {
    const auto i = static_cast<Index>(rng.below(20));
    const auto j = static_cast<Index>(rng.below(20));
    if (i == j) continue;
    const double g = rng.uniform() < 0.5 ? 1.0 : -1.0;
    const double alpha =
        rng.uniform() *
        max_feasible_stepsize(state->point(), i, j, g, inst.problem.bounds).min_with(1.0);
    state->apply_move(i, j, alpha * g);
  }
  CHECK(std::abs(state->point().sum() - 1.0) <= 1e-12);
}

TEST_CASE("partials match central finite differences on every family") {
  std::vector<GeneratedInstance> insts;
  insts.push_back(gen_chebyshev(16, 6, 21));
  insts.push_back(gen_logexp(16, 22, 1));
  insts.push_back(gen_logexp(16, 23, 2));
  insts.push_back(gen_nonconvex(14, 10, 0.4, 24));
  {
    std::istringstream toy(make_svm_toy_dataset(14, 4, 25));
    insts.push_back(load_svm_dual(toy, 1.0));
  }
  for (const auto& inst : insts) {
    CAPTURE(family_name(inst.family));
    for (int probe = 0; probe < 20; ++probe) {
      const Vec x = random_feasible_point(inst, 400 + probe);
      const Vec numeric = finite_diff_gradient(inst.problem, x, 1e-6);
      for (Index i = 0; i < inst.n; ++i) {
        const double analytic = inst.problem.objective->partial(i, x);
        CHECK(std::abs(analytic - numeric[i]) <= 1e-5 * (1.0 + std::abs(analytic)));
      }
    }
  }
}

TEST_CASE("pair_move_value agrees with evaluating the shifted point") {
  const GeneratedInstance inst = gen_nonconvex(12, 8, 0.5, 31);
  const Objective& obj = *inst.problem.objective;
  Rng rng(17);
  for (int t = 0; t < 100; ++t) {
    const Vec x = random_feasible_point(inst, 600 + t);
    const auto i = static_cast<Index>(rng.below(12));
    const auto j = static_cast<Index>(rng.below(12));
    if (i == j) continue;
    const double step = rng.uniform(-0.3, 0.3);
    Vec shifted = x;
    shifted[i] += step;
    shifted[j] -= step;
    const double direct = obj.value(shifted);
    CHECK(std::abs(obj.pair_move_value(x, i, j, step) - direct) <=
          1e-12 * (1.0 + std::abs(direct)));
  }
}
