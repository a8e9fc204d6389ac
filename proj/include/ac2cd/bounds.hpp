#pragma once

#include <Eigen/Core>
#include <vector>

#include "ac2cd/errors.hpp"
#include "ac2cd/ext_real.hpp"

namespace ac2cd {

using Index = Eigen::Index;
using Vec = Eigen::VectorXd;

// Box constraints l_i <= x_i <= u_i with l_i < u_i; either side may be infinite.
class Bounds {
 public:
  Bounds() = default;
  Bounds(std::vector<ExtReal> lower, std::vector<ExtReal> upper);

  static Bounds uniform(Index n, ExtReal lower, ExtReal upper);
  static Bounds unbounded(Index n);

  Index size() const { return static_cast<Index>(lower_.size()); }
  ExtReal lower(Index i) const { return lower_[static_cast<std::size_t>(i)]; }
  ExtReal upper(Index i) const { return upper_[static_cast<std::size_t>(i)]; }

  bool contains(Index i, double x, double tol) const;

  // Distance of x_i from its nearest bound: min{x_i - l_i, u_i - x_i}.
  ExtReal nearest_bound_distance(Index i, double x) const {
    return min(gap_below(x, lower(i)), gap_above(upper(i), x));
  }

  // Snaps x_i onto a bound it overshoots by less than tol; larger violations
  // are left untouched for the caller to report.
  double clamp_drift(Index i, double x, double tol) const;

 private:
  std::vector<ExtReal> lower_;
  std::vector<ExtReal> upper_;
};

}  // namespace ac2cd
