#pragma once

#include <memory>

#include "ac2cd/bounds.hpp"

namespace ac2cd {

class OracleState;

// Objective oracle. Immutable after construction and safe for concurrent
// reads; per-run mutable evaluation state lives in OracleState.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual Index dim() const = 0;
  virtual double value(const Vec& x) const = 0;
  virtual double partial(Index i, const Vec& x) const = 0;

  // f(x + t(e_i - e_j)). The default forms the shifted point; structured
  // objectives override with an O(m) or O(1) expansion.
  virtual double pair_move_value(const Vec& x, Index i, Index j, double t) const;

  // Convenience loop over partial(); structured objectives override.
  virtual Vec gradient(const Vec& x) const;

  // Positive overestimate of the Lipschitz constant of t -> f(x + t(e_i-e_j))'.
  virtual bool has_pair_lipschitz() const { return false; }
  virtual double pair_lipschitz(Index i, Index j) const;

  // Per-coordinate derivative constants L_i of separable objectives.
  virtual bool has_coordinate_lipschitz() const { return false; }
  virtual Vec coordinate_lipschitz_constants() const;

  // Curvature of the pair direction, (e_i-e_j)^T H (e_i-e_j), for quadratics.
  virtual bool is_quadratic() const { return false; }
  virtual double pair_curvature(Index i, Index j) const;

  virtual std::unique_ptr<OracleState> make_state(const Vec& x0) const;
};

// Mutable per-run evaluation state anchored at a current point. Structured
// objectives back this with a residual cache so that partials stay cheap.
class OracleState {
 public:
  virtual ~OracleState() = default;

  virtual const Vec& point() const = 0;
  virtual double value() const = 0;
  virtual double partial(Index i) const = 0;

  // f at point + t(e_i - e_j) without moving.
  virtual double move_value(Index i, Index j, double t) const = 0;

  // point += t(e_i - e_j), keeping caches coherent.
  virtual void apply_move(Index i, Index j, double t) = 0;

  // Drift repair only: overwrites one coordinate without a cache update. The
  // adjustment must be below the feasibility tolerances.
  virtual void clamp_coordinate(Index i, double v) = 0;

  // Rebuild caches from the current point.
  virtual void refresh() = 0;
};

// Fallback state for objectives without structure: stores the point and
// re-evaluates through the stateless oracle.
class GenericOracleState final : public OracleState {
 public:
  GenericOracleState(const Objective& obj, Vec x) : obj_(obj), x_(std::move(x)) {
    fval_ = obj_.value(x_);
  }

  const Vec& point() const override { return x_; }
  double value() const override { return fval_; }
  double partial(Index i) const override { return obj_.partial(i, x_); }
  double move_value(Index i, Index j, double t) const override {
    return obj_.pair_move_value(x_, i, j, t);
  }
  void apply_move(Index i, Index j, double t) override {
    x_[i] += t;
    x_[j] -= t;
    fval_ = obj_.value(x_);
  }
  void clamp_coordinate(Index i, double v) override { x_[i] = v; }
  void refresh() override { fval_ = obj_.value(x_); }

 private:
  const Objective& obj_;
  Vec x_;
  double fval_;
};

// min f(x)  s.t.  sum_i x_i = level,  bounds.
struct Problem {
  Index n = 0;
  double level = 0.0;
  Bounds bounds;
  std::shared_ptr<const Objective> objective;

  double feasibility_tol() const { return 1e-9 * (1.0 + std::abs(level)); }
  static constexpr double kBoundTol = 1e-12;
};

struct FeasiblePoint {
  Vec coordinates;
};

// Validates p against the equality level and the bounds; never repairs.
FeasiblePoint project_report_feasibility(const Vec& p, const Problem& prob);

// max(0, max_{i: x_i > l_i} grad_i - min_{i: x_i < u_i} grad_i); zero exactly
// at stationary points.
double kkt_residual(const Vec& x, const Vec& grad, const Problem& prob);

ExtReal nearest_bound_distance(const Vec& x, Index h, const Problem& prob);

}  // namespace ac2cd
