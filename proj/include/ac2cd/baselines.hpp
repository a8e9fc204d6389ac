#pragma once

#include <optional>
#include <utility>

#include "ac2cd/rng.hpp"
#include "ac2cd/solver.hpp"

namespace ac2cd {

// Triangular decoding of an unordered pair from a single uniform draw on
// (0, n(n-1)/2). Returns 0-based (i, j) with i > j.
std::pair<Index, Index> decode_pair_uniform(std::uint64_t r_floor, Index n);

// Working-set sampler for random coordinate descent: uniform over unordered
// pairs, or weighted by w_ij = 1/L_i + 1/L_j via inverse-CDF lookup on the
// cumulative pair weights (O(n^2) table, binary-search sampling).
class PairSampler {
 public:
  static PairSampler uniform(Index n);
  static PairSampler lipschitz_weighted(const Vec& coordinate_lipschitz);

  std::pair<Index, Index> sample(Rng& rng) const;
  bool weighted() const { return !cumulative_.empty(); }
  double pair_probability(Index i, Index j) const;

 private:
  explicit PairSampler(Index n) : n_(n) {}

  Index n_ = 0;
  std::vector<double> cumulative_;  // empty for the uniform sampler
};

enum class BaselineMethod { RcdUniform, RcdLipschitz, Mvp };
const char* baseline_method_name(BaselineMethod m);

struct BaselineConfig {
  BaselineMethod method = BaselineMethod::RcdUniform;
  std::uint64_t rng_seed = 0;
  double gamma = 0.5;    // RCD Lipschitz stepsize on non-quadratic objectives
  double a_upper = 1e12; // RCD nonpositive-curvature cap
  ExactLineSearchRule line_search;  // MVP stepsize
  std::int64_t max_inner = 1000000; // total pair updates budget
};

// Either a benchmark-objective stop (convex runs: normalized error vs a
// reference value) or the stationarity stop at epsilon.
struct StopPolicy {
  std::optional<double> f_target;
  double nu = 1e-6;
  double epsilon = 1e-1;
};

struct RcdStepOutcome {
  bool skipped = false;  // pinned pair, no derivatives charged
  bool moved = false;
  double grad_i = 0.0;
  double grad_j = 0.0;
};

// One RCD update of the pair (i, j): quadratic-model stepsize on quadratics,
// Lipschitz stepsize otherwise, clipped to the feasible interval.
RcdStepOutcome rcd_step(OracleState& state, const Problem& prob, Index i, Index j,
                        double gamma, double a_upper);

struct MvpStepOutcome {
  bool stationary = false;   // min over free - max over held >= -epsilon
  double violation = 0.0;    // max held gradient minus min free gradient
  double min_free = 0.0;     // smallest gradient over {i : x_i < u_i}
  double max_held = 0.0;     // largest gradient over {i : x_i > l_i}
  Index p = -1;              // argmin over {i : x_i < u_i}
  Index j = -1;              // argmax over {i : x_i > l_i}
  bool moved = false;
};

// One maximal-violating-pair update from the full gradient, exact line search.
MvpStepOutcome mvp_step(OracleState& state, const Problem& prob, double epsilon,
                        const ExactLineSearchRule& ls, std::int64_t* partial_evals);

// Runs a baseline to its stop policy. RCD traces one record per outer
// iteration (n inner samples); MVP traces one record per iteration.
SolveResult run_baseline(const Problem& prob, const Vec& x0, const BaselineConfig& cfg,
                         const StopPolicy& stop);

}  // namespace ac2cd
