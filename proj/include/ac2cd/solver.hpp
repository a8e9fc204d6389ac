#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ac2cd/stepsize.hpp"

namespace ac2cd {

// j(k) selection: any index within tau of the largest bound distance, the
// sticky rate-mode variant, or a caller-pinned index (problems with no bounds).
enum class IndexRule { ThresholdAny, RateMode, Fixed };

struct Ac2cdConfig {
  double tau = 0.9;
  IndexRule index_rule = IndexRule::RateMode;
  Index fixed_index = 0;
  StepsizeRule stepsize = QuadraticExactRule{};
  double epsilon = 1e-1;
  Index max_outer = 1000000;
  std::uint64_t rng_seed = 0;
  bool shuffle_each_outer = true;
  bool collect_inner_records = false;
};

void validate(const Ac2cdConfig& cfg, const Problem& prob);

enum class TerminalStatus { Converged, MaxOuter, NumericalFailure };
const char* terminal_status_name(TerminalStatus s);

struct InnerStepRecord {
  Index outer = 0;
  Index inner = 0;
  Index p = 0;
  Index j = 0;
  double g = 0.0;
  double alpha = 0.0;
  ExtReal alpha_max = ExtReal(0.0);
  bool skipped = false;  // both working-set coordinates pinned, derivatives not charged
  bool noop = false;     // p == j position of the permutation
};

struct TraceRecord {
  Index k = 0;
  double objective = 0.0;
  // max(0, G_max - G_min) of the sweep; the terminal record carries the
  // full-gradient KKT residual instead.
  double stationarity = 0.0;
  double g_min = 0.0;
  double g_max = 0.0;
  Index j = -1;                    // fixed working-set index of the sweep; -1 on the final record
  std::int64_t partial_evals = 0;  // cumulative
  std::int64_t pair_updates = 0;   // cumulative
  double wall_time = 0.0;          // seconds since run start
};

struct RunTrace {
  std::vector<TraceRecord> records;
  TerminalStatus status = TerminalStatus::MaxOuter;
  std::string message;
  double final_kkt_residual = 0.0;
  std::vector<InnerStepRecord> inner;  // populated when collect_inner_records
};

struct SolveResult {
  Vec x;
  double objective = 0.0;
  RunTrace trace;
};

class InnerObserver {
 public:
  virtual ~InnerObserver() = default;
  virtual void on_inner_step(const InnerStepRecord& rec, const Vec& z_after) = 0;
};

// Smallest index h with D_h(x) >= tau * max_h D_h(x); infinite distances
// dominate. With every coordinate on a bound the threshold is vacuous and the
// smallest coordinate strictly above its lower bound is returned, so a sweep
// can still move mass away from it.
Index select_index_threshold(const Vec& x, double tau, const Problem& prob);

// Keeps j_prev while it stays within the threshold, otherwise the smallest
// index attaining the maximum distance.
Index select_index_rate_mode(const Vec& x, Index j_prev, double tau, const Problem& prob);

// Outer-level stop G_min - G_max >= -epsilon. Sentinel-initialized trackers
// (nothing contributed) never signal a stop.
bool check_termination(double g_min, double g_max, double epsilon);

// Fresh partial derivatives at the current point for all n coordinates,
// re-verifying the stop inequality; partial_evals is charged n.
bool final_sweep(const OracleState& state, const Problem& prob, double epsilon,
                 std::int64_t* partial_evals);

// Bound-aware residual from a full gradient that tolerates one-sided empty
// index sets (they impose no condition).
double stationarity_residual(const Vec& x, const Vec& grad, const Problem& prob);

struct SweepStats {
  double g_min = 0.0;
  double g_max = 0.0;
  std::int64_t partial_evals = 0;
  std::int64_t pair_updates = 0;
  std::int64_t value_evals = 0;
};

// One outer iteration: n inner steps pairing each permutation entry with j.
SweepStats run_inner_sweep(OracleState& state, const Problem& prob, const Ac2cdConfig& cfg,
                           Index j, const std::vector<Index>& perm, Index outer_k,
                           std::vector<InnerStepRecord>* records = nullptr,
                           InnerObserver* observer = nullptr);

SolveResult solve(const Problem& prob, const Vec& x0, const Ac2cdConfig& cfg,
                  InnerObserver* observer = nullptr);

}  // namespace ac2cd
