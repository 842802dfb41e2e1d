#pragma once

// Helpers shared by the solver loops. Not installed.

#include <chrono>
#include <cmath>
#include <span>
#include <vector>

#include "structflow/duality.hpp"
#include "structflow/solvers.hpp"

namespace structflow::detail {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

inline double gap_of(const Problem& problem, std::span<const double> w) {
  return duality_gap(w, problem.x, problem.loss, problem.lambda, problem.groups, problem.norm);
}

inline double sup_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

/// Number of groups containing each coordinate.
inline std::vector<double> cover_counts(const GroupStructure& gs) {
  std::vector<double> c(gs.dimension());
  for (std::size_t j = 0; j < c.size(); ++j) c[j] = static_cast<double>(gs.groups_of(j).size());
  return c;
}

}  // namespace structflow::detail
