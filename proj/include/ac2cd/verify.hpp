#pragma once

#include "ac2cd/instances.hpp"
#include "ac2cd/solver.hpp"

namespace ac2cd {

// Dense grid scan plus ternary refinement over [0, alpha_max]; independent
// check for the golden-section line search. Within grid resolution of the
// global scalar minimum for unimodal phi.
double brute_force_line_search(const Problem& prob, const Vec& z, Index p, Index j, double g,
                               double alpha_max, Index grid_points = 100000);

// Eliminates coordinate jbar through x = M y + w: the n-1 remaining
// coordinates are free and x_jbar = level - sum(y). psi(y) = f(My + w).
class TransformedProblem {
 public:
  TransformedProblem(const Problem& source, Index jbar);

  Index dim() const { return source_.n - 1; }
  Index jbar() const { return jbar_; }
  Index x_index(Index yi) const { return yi < jbar_ ? yi : yi + 1; }

  Vec to_x(const Vec& y) const;
  Vec to_y(const Vec& x) const;

  double psi(const Vec& y) const { return source_.objective->value(to_x(y)); }
  // grad_i psi(y) = grad f_i(x) - grad f_jbar(x) at x = My + w.
  double psi_partial(Index yi, const Vec& y) const;
  Vec psi_gradient(const Vec& y) const;

 private:
  const Problem& source_;
  Index jbar_;
};

// Runs AC2CD (fixed index jbar, Lipschitz stepsize with gamma = 1/2, one
// seeded permutation) against plain cyclic coordinate descent with steps
// 1/Lbar on the transformed problem, replaying the identical update order.
// Returns the max coordinate deviation between the two trajectories.
double trajectory_equivalence_check(const Problem& prob_unbounded, Index jbar, Index sweep_count,
                                    std::uint64_t seed);

struct RateReport {
  double c_hat = std::numeric_limits<double>::quiet_NaN();    // fitted tail contraction
  double c_bound = std::numeric_limits<double>::quiet_NaN();  // theoretical constant
  Index window = 0;
  double fit_residual = std::numeric_limits<double>::quiet_NaN();
  bool per_step_ok = false;  // gap_{k+1} <= C gap_k held for every usable k
  double max_ratio = 0.0;    // largest consecutive gap ratio observed
  bool stabilized = false;   // j(k) settled on one index
  Index stable_j = -1;
  bool interior = false;     // stabilized coordinate strictly inside its bounds
  double f_star = std::numeric_limits<double>::quiet_NaN();
};

// Independent optimum for the separable equality-constrained problem: solves
// sum_i x_i(lambda) = level where f_i'(x_i(lambda)) = lambda, by safeguarded
// Newton/bisection on the scalar multiplier equation.
struct ScalarDualSolution {
  double f_star = 0.0;
  double lambda = 0.0;
  Vec x_star;
};
ScalarDualSolution logexp_optimum(const SeparableLogExp& obj, double level);

// Contraction constant of the no-bounds linear rate with L_{i,jbar} = L_i + L_jbar:
// C = 1 - mu / (2 Lmax [1 + (n-1) (sum_i L_{i,jbar})^2 / Lmin^2]).
double rate_bound_constant(const SeparableLogExp& obj, Index jbar);

// Fixed-index Lipschitz-step run on a separable instance; checks the
// per-iteration inequality against the closed-form constant and fits the
// empirical tail contraction.
RateReport rate_bound_check(const GeneratedInstance& inst, Index jbar, Index max_outer = 20000,
                            std::uint64_t run_seed = 0);

// Rate-mode exact-line-search run on a bounded strictly convex instance;
// reports j(k) stabilization, interiority, and the fitted tail contraction
// against a long high-accuracy reference run.
RateReport asymptotic_rate_check(const GeneratedInstance& inst, std::uint64_t run_seed = 0);

// Central differences in ambient coordinates with per-coordinate step
// h (1 + |x_i|); value oracle only.
Vec finite_diff_gradient(const Problem& prob, const Vec& x, double h);

struct EigenStats {
  Index n_neg = 0;
  Index n_pos = 0;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
};

// Dense symmetric eigensolve of Q^T D Q; reporting utility for small n.
EigenStats eigen_stats(const StructuredQuadratic& quad, Index max_n = 500);

}  // namespace ac2cd
