#pragma once

#include <memory>
#include <sstream>
#include <string>

#include "ac2cd/harness.hpp"

namespace ac2cd::testing {

// min 1/2 ||x||^2 over the unit simplex: Q = I, D = 1, q = 0.
inline GeneratedInstance simplex_quadratic(Index n) {
  auto quad = std::make_shared<StructuredQuadratic>(Eigen::MatrixXd::Identity(n, n),
                                                    Vec::Ones(n), Vec::Zero(n));
  GeneratedInstance inst;
  inst.family = Family::Chebyshev;
  inst.n = n;
  inst.m = n;
  inst.quadratic = quad;
  inst.problem = Problem{n, 1.0, Bounds::uniform(n, ExtReal(0.0), ExtReal(1.0)), quad};
  return inst;
}

inline Vec vertex(Index n, Index at) {
  Vec x = Vec::Zero(n);
  x[at] = 1.0;
  return x;
}

// Drops the trailing wall-time column from every CSV row.
inline std::string strip_wall_column(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    const auto comma = line.rfind(',');
    out << (comma == std::string::npos ? line : line.substr(0, comma)) << '\n';
  }
  return out.str();
}

inline std::string trace_to_string(const RunTrace& trace) {
  std::ostringstream out;
  write_trace_csv(trace, out);
  return out.str();
}

}  // namespace ac2cd::testing
