#include "ac2cd/problem.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace ac2cd {

Bounds::Bounds(std::vector<ExtReal> lower, std::vector<ExtReal> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size()) {
    throw Error(ErrorCode::ConfigError, "bound vectors differ in length");
  }
  for (std::size_t i = 0; i < lower_.size(); ++i) {
    if (!(lower_[i] < upper_[i])) {
      throw Error(ErrorCode::ConfigError,
                  "bounds require l_i < u_i at index " + std::to_string(i));
    }
  }
}

Bounds Bounds::uniform(Index n, ExtReal lower, ExtReal upper) {
  return Bounds(std::vector<ExtReal>(static_cast<std::size_t>(n), lower),
                std::vector<ExtReal>(static_cast<std::size_t>(n), upper));
}

Bounds Bounds::unbounded(Index n) {
  return uniform(n, ExtReal::neg_inf(), ExtReal::pos_inf());
}

bool Bounds::contains(Index i, double x, double tol) const {
  const ExtReal l = lower(i);
  const ExtReal u = upper(i);
  if (l.finite() && x < l.value() - tol) return false;
  if (u.finite() && x > u.value() + tol) return false;
  return true;
}

double Bounds::clamp_drift(Index i, double x, double tol) const {
  const ExtReal l = lower(i);
  const ExtReal u = upper(i);
  if (l.finite() && x < l.value() && l.value() - x < tol) return l.value();
  if (u.finite() && x > u.value() && x - u.value() < tol) return u.value();
  return x;
}

double Objective::pair_move_value(const Vec& x, Index i, Index j, double t) const {
  Vec y = x;
  y[i] += t;
  y[j] -= t;
  return value(y);
}

Vec Objective::gradient(const Vec& x) const {
  Vec g(dim());
  for (Index i = 0; i < dim(); ++i) g[i] = partial(i, x);
  return g;
}

double Objective::pair_lipschitz(Index, Index) const {
  throw Error(ErrorCode::ConfigError, "objective provides no pair Lipschitz constants");
}

Vec Objective::coordinate_lipschitz_constants() const {
  throw Error(ErrorCode::ConfigError, "objective provides no coordinate Lipschitz constants");
}

double Objective::pair_curvature(Index, Index) const {
  throw Error(ErrorCode::ConfigError, "objective is not quadratic");
}

std::unique_ptr<OracleState> Objective::make_state(const Vec& x0) const {
  return std::make_unique<GenericOracleState>(*this, x0);
}

FeasiblePoint project_report_feasibility(const Vec& p, const Problem& prob) {
  if (p.size() != prob.n) {
    throw Error(ErrorCode::ConfigError, "point has wrong dimension");
  }
  const double sum = p.sum();
  if (std::abs(sum - prob.level) > prob.feasibility_tol()) {
    std::ostringstream msg;
    msg << "sum(x) = " << sum << " but level = " << prob.level;
    throw Error(ErrorCode::InfeasibleEquality, msg.str());
  }
  for (Index i = 0; i < prob.n; ++i) {
    if (!prob.bounds.contains(i, p[i], Problem::kBoundTol)) {
      throw Error(ErrorCode::BoundViolation,
                  "coordinate " + std::to_string(i) + " outside its bounds");
    }
  }
  return FeasiblePoint{p};
}

double kkt_residual(const Vec& x, const Vec& grad, const Problem& prob) {
  double min_free = std::numeric_limits<double>::infinity();
  double max_held = -std::numeric_limits<double>::infinity();
  bool any_free = false;
  bool any_held = false;
  for (Index i = 0; i < prob.n; ++i) {
    const ExtReal u = prob.bounds.upper(i);
    const ExtReal l = prob.bounds.lower(i);
    if (!u.finite() || x[i] < u.value()) {
      min_free = std::min(min_free, grad[i]);
      any_free = true;
    }
    if (!l.finite() || x[i] > l.value()) {
      max_held = std::max(max_held, grad[i]);
      any_held = true;
    }
  }
  if (!any_free || !any_held) {
    throw Error(ErrorCode::EmptyIndexSet, "no coordinate strictly below/above its bound");
  }
  return std::max(0.0, max_held - min_free);
}

ExtReal nearest_bound_distance(const Vec& x, Index h, const Problem& prob) {
  return prob.bounds.nearest_bound_distance(h, x[h]);
}

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InfeasibleEquality: return "InfeasibleEquality";
    case ErrorCode::BoundViolation: return "BoundViolation";
    case ErrorCode::EmptyIndexSet: return "EmptyIndexSet";
    case ErrorCode::DegenerateLevelSet: return "DegenerateLevelSet";
    case ErrorCode::BacktrackOverflow: return "BacktrackOverflow";
    case ErrorCode::MaxEvalsExceeded: return "MaxEvalsExceeded";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::LabelError: return "LabelError";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::InstanceError: return "InstanceError";
    case ErrorCode::OptimumUnavailable: return "OptimumUnavailable";
  }
  return "UnknownError";
}

}  // namespace ac2cd
