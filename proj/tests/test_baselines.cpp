#include <doctest.h>

#include <map>
#include <set>

#include "test_helpers.hpp"

using namespace ac2cd;
using testing::simplex_quadratic;
using testing::vertex;

TEST_CASE("triangular pair decoding matches the closed form") {
  CHECK(decode_pair_uniform(0, 3) == std::pair<Index, Index>{1, 0});
  CHECK(decode_pair_uniform(1, 3) == std::pair<Index, Index>{2, 0});
  CHECK(decode_pair_uniform(2, 3) == std::pair<Index, Index>{2, 1});
}

TEST_CASE("pair decoding is a bijection for n up to 50") {
  for (Index n = 2; n <= 50; ++n) {
    const std::uint64_t total =
        static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n - 1) / 2;
    std::set<std::pair<Index, Index>> seen;
    for (std::uint64_t r = 0; r < total; ++r) {
      const auto [i, j] = decode_pair_uniform(r, n);
      REQUIRE(i > j);
      REQUIRE(j >= 0);
      REQUIRE(i < n);
      seen.insert({i, j});
    }
    CHECK(seen.size() == total);
  }
}

TEST_CASE("uniform sampler passes a chi-square test at n = 10") {
  const Index n = 10;
  const PairSampler sampler = PairSampler::uniform(n);
  Rng rng(2024);
  std::map<std::pair<Index, Index>, int> counts;
  const int draws = 100000;
  for (int t = 0; t < draws; ++t) ++counts[sampler.sample(rng)];
  const double expected = static_cast<double>(draws) / 45.0;
  double stat = 0.0;
  for (Index i = 1; i < n; ++i) {
    for (Index j = 0; j < i; ++j) {
      const double diff = counts[{i, j}] - expected;
      stat += diff * diff / expected;
    }
  }
  // df = 44; the 0.999 quantile is about 78.7.
  CHECK(stat < 78.7);
}

TEST_CASE("weighted sampler frequencies track 1/L_i + 1/L_j") {
  const GeneratedInstance inst = gen_logexp(10, 6, 1);
  const Vec lips = inst.separable->coordinate_lipschitz();
  const PairSampler sampler = PairSampler::lipschitz_weighted(lips);
  Rng rng(101);
  std::map<std::pair<Index, Index>, int> counts;
  const int draws = 100000;
  for (int t = 0; t < draws; ++t) ++counts[sampler.sample(rng)];
  for (Index i = 1; i < 10; ++i) {
    for (Index j = 0; j < i; ++j) {
      const double p = sampler.pair_probability(i, j);
      const double se = std::sqrt(p * (1.0 - p) * draws);
      CHECK(std::abs(counts[{i, j}] - p * draws) <= 3.0 * se);
    }
  }
  CHECK_THROWS_AS(PairSampler::lipschitz_weighted(Vec::Zero(4)), Error);
}

TEST_CASE("rcd step solves the identity-Hessian pair exactly") {
  const GeneratedInstance inst = simplex_quadratic(3);
  Vec z(3);
  z << 0.8, 0.2, 0.0;
  auto state = inst.problem.objective->make_state(z);
  const RcdStepOutcome out = rcd_step(*state, inst.problem, 1, 0, 0.5, 1e12);
  CHECK(out.moved);
  CHECK(state->point()[0] == doctest::Approx(0.5));
  CHECK(state->point()[1] == doctest::Approx(0.5));
}

TEST_CASE("rcd step skips pinned pairs and zero derivatives") {
  const GeneratedInstance inst = simplex_quadratic(3);
  {
    auto state = inst.problem.objective->make_state(vertex(3, 2));
    const RcdStepOutcome out = rcd_step(*state, inst.problem, 0, 1, 0.5, 1e12);
    CHECK(out.skipped);
    CHECK(!out.moved);
  }
  {
    Vec z(3);
    z << 0.4, 0.4, 0.2;
    auto state = inst.problem.objective->make_state(z);
    const RcdStepOutcome out = rcd_step(*state, inst.problem, 0, 1, 0.5, 1e12);
    CHECK(!out.skipped);
    CHECK(!out.moved);  // equal partials: g = 0
  }
}

TEST_CASE("mvp picks the most violating pair with smallest-index ties") {
  const GeneratedInstance inst = simplex_quadratic(3);
  auto state = inst.problem.objective->make_state(vertex(3, 0));
  std::int64_t evals = 0;
  const MvpStepOutcome out = mvp_step(*state, inst.problem, 1e-12, ExactLineSearchRule{}, &evals);
  CHECK(evals == 3);
  CHECK(out.p == 1);  // gradient (1,0,0): tie between 1 and 2 below u
  CHECK(out.j == 0);
  CHECK(out.moved);
  CHECK(state->point()[0] == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(state->point()[1] == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("mvp reports stationarity at the simplex center") {
  const GeneratedInstance inst = simplex_quadratic(3);
  auto state = inst.problem.objective->make_state(Vec::Constant(3, 1.0 / 3.0));
  const MvpStepOutcome out = mvp_step(*state, inst.problem, 1e-10, ExactLineSearchRule{}, nullptr);
  CHECK(out.stationary);
  CHECK(!out.moved);
}

TEST_CASE("mvp pair attains the brute-force maximum violation") {
  for (std::uint64_t seed : {5ULL, 6ULL, 7ULL}) {
    const GeneratedInstance inst = gen_chebyshev(30, 8, seed);
    const Vec x = random_feasible_point(inst, seed + 50);
    auto state = inst.problem.objective->make_state(x);
    const MvpStepOutcome out =
        mvp_step(*state, inst.problem, 1e-12, ExactLineSearchRule{}, nullptr);
    const Vec grad = inst.problem.objective->gradient(x);
    double best = -std::numeric_limits<double>::infinity();
    for (Index p = 0; p < inst.n; ++p) {
      for (Index j = 0; j < inst.n; ++j) {
        if (p == j) continue;
        const bool p_free = x[p] < inst.problem.bounds.upper(p).value();
        const bool j_held = x[j] > inst.problem.bounds.lower(j).value();
        if (p_free && j_held) best = std::max(best, grad[j] - grad[p]);
      }
    }
    CHECK(out.violation == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("baseline run stops immediately when the target is already met") {
  const GeneratedInstance inst = simplex_quadratic(3);
  BaselineConfig cfg;
  cfg.method = BaselineMethod::RcdUniform;
  StopPolicy stop;
  const Vec x0 = Vec::Constant(3, 1.0 / 3.0);
  stop.f_target = inst.problem.objective->value(x0);
  const SolveResult res = run_baseline(inst.problem, x0, cfg, stop);
  CHECK(res.trace.status == TerminalStatus::Converged);
  CHECK(res.trace.records.size() == 1);  // only the terminal record
}

TEST_CASE("seeded uniform rcd reaches the benchmark objective") {
  const GeneratedInstance inst = simplex_quadratic(3);
  BaselineConfig cfg;
  cfg.method = BaselineMethod::RcdUniform;
  cfg.rng_seed = 11;
  StopPolicy stop;
  stop.f_target = 1.0 / 6.0;
  stop.nu = 1e-6;
  const SolveResult res = run_baseline(inst.problem, vertex(3, 0), cfg, stop);
  CHECK(res.trace.status == TerminalStatus::Converged);
  CHECK((res.objective - 1.0 / 6.0) / (1.0 + 1.0 / 6.0) <= 1e-6);
  for (std::size_t k = 1; k < res.trace.records.size(); ++k) {
    CHECK(res.trace.records[k].objective <= res.trace.records[k - 1].objective + 1e-12);
  }
}

TEST_CASE("rcd with the stationarity stop terminates on the nonconvex family") {
  const GeneratedInstance inst = gen_nonconvex(30, 20, 0.5, 3);
  BaselineConfig cfg;
  cfg.method = BaselineMethod::RcdUniform;
  cfg.rng_seed = 5;
  StopPolicy stop;  // no target: epsilon criterion
  stop.epsilon = 1e-1;
  const SolveResult res = run_baseline(inst.problem, inst.default_start(9), cfg, stop);
  CHECK(res.trace.status == TerminalStatus::Converged);
  CHECK(res.trace.final_kkt_residual <= 1e-1);
}

TEST_CASE("lipschitz-weighted rcd converges on the separable family") {
  const GeneratedInstance inst = gen_logexp(40, 13, 2);
  // Reference objective from the scalar dual oracle.
  const double f_star = logexp_optimum(*inst.separable, 0.0).f_star;
  BaselineConfig cfg;
  cfg.method = BaselineMethod::RcdLipschitz;
  cfg.rng_seed = 17;
  StopPolicy stop;
  stop.f_target = f_star;
  stop.nu = 1e-6;
  const SolveResult res = run_baseline(inst.problem, Vec::Zero(40), cfg, stop);
  CHECK(res.trace.status == TerminalStatus::Converged);
}

TEST_CASE("baseline traces are monotone on convex instances") {
  const GeneratedInstance inst = gen_chebyshev(50, 10, 29);
  const Vec x0 = inst.default_start(4);
  const double target = solve(inst.problem, x0, Ac2cdConfig{}).objective;
  for (const BaselineMethod method : {BaselineMethod::RcdUniform, BaselineMethod::Mvp}) {
    BaselineConfig cfg;
    cfg.method = method;
    cfg.rng_seed = 3;
    StopPolicy stop;
    stop.f_target = target;
    const SolveResult res = run_baseline(inst.problem, x0, cfg, stop);
    REQUIRE(res.trace.records.size() > 1);
    for (std::size_t k = 1; k < res.trace.records.size(); ++k) {
      const double prev = res.trace.records[k - 1].objective;
      CHECK(res.trace.records[k].objective <= prev + 1e-12 * (1.0 + std::abs(prev)));
    }
  }
}
