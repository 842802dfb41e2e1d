#include "structflow/projection.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace structflow {
namespace {

void check_inputs(std::span<const double> v, double radius) {
  if (!(radius >= 0.0)) throw std::invalid_argument("l1 projection: radius must be non-negative");
  for (double x : v) {
    if (!(x >= 0.0)) throw std::invalid_argument("l1 projection: entries must be non-negative");
  }
}

double median_of_three(double a, double b, double c) {
  return std::max(std::min(a, b), std::min(std::max(a, b), c));
}

}  // namespace

double l1_threshold(std::span<double> values, double radius) {
  // Candidate set values[lo, hi); (sum, count) describe elements already
  // known to lie above the threshold.
  std::size_t lo = 0;
  std::size_t hi = values.size();
  double sum = 0.0;
  std::size_t count = 0;
  int unproductive = 0;
  const int limit = 3 * static_cast<int>(std::ceil(std::log2(static_cast<double>(values.size()) + 1.0)));

  while (lo < hi) {
    if (unproductive > limit) {
      std::sort(values.begin() + lo, values.begin() + hi, std::greater<>());
      for (std::size_t k = lo; k < hi; ++k) {
        const double s = sum + values[k];
        if (s - static_cast<double>(count + 1) * values[k] < radius) {
          sum = s;
          ++count;
        } else {
          break;
        }
      }
      break;
    }
    const std::size_t size = hi - lo;
    const double pivot = median_of_three(values[lo], values[lo + size / 2], values[hi - 1]);
    auto first = values.begin() + lo;
    auto last = values.begin() + hi;
    auto above_end = std::partition(first, last, [pivot](double x) { return x > pivot; });
    auto equal_end = std::partition(above_end, last, [pivot](double x) { return x == pivot; });

    double dsum = 0.0;
    for (auto it = first; it != equal_end; ++it) dsum += *it;
    const auto dcount = static_cast<std::size_t>(equal_end - first);

    std::size_t next_lo, next_hi;
    if (sum + dsum - static_cast<double>(count + dcount) * pivot < radius) {
      sum += dsum;
      count += dcount;
      next_lo = static_cast<std::size_t>(equal_end - values.begin());
      next_hi = hi;
    } else {
      next_lo = lo;
      next_hi = static_cast<std::size_t>(above_end - values.begin());
    }
    if (4 * (next_hi - next_lo) > 3 * size) ++unproductive;
    lo = next_lo;
    hi = next_hi;
  }
  if (count == 0) {
    // Only reachable for radius 0: every entry is cut down to zero.
    return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
  }
  return std::max(0.0, (sum - radius) / static_cast<double>(count));
}

void project_l1_ball(std::span<const double> v, double radius, std::span<double> out,
                     std::vector<double>& scratch) {
  check_inputs(v, radius);
  double total = 0.0;
  for (double x : v) total += x;
  if (total <= radius) {
    std::copy(v.begin(), v.end(), out.begin());
    return;
  }
  if (radius == 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  scratch.assign(v.begin(), v.end());
  const double theta = l1_threshold(scratch, radius);
  for (std::size_t j = 0; j < v.size(); ++j) out[j] = std::max(v[j] - theta, 0.0);
}

std::vector<double> project_l1_ball(std::span<const double> v, double radius) {
  std::vector<double> out(v.size());
  std::vector<double> scratch;
  project_l1_ball(v, radius, out, scratch);
  return out;
}

void project_l1_ball_box(std::span<const double> v, double radius, std::span<const double> ub,
                         std::span<double> out, std::vector<double>& scratch) {
  check_inputs(v, radius);
  if (ub.size() != v.size()) throw std::invalid_argument("l1 projection: ub has the wrong length");
  for (double b : ub) {
    if (!(b >= 0.0)) throw std::invalid_argument("l1 projection: bounds must be non-negative");
  }
  double clipped_total = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    out[j] = std::min(v[j], ub[j]);
    clipped_total += out[j];
  }
  if (clipped_total <= radius) return;

  // Clamp the coordinates that overshoot their bound, re-threshold the rest
  // with the remaining budget, repeat until no new bound becomes active. The
  // threshold only decreases, so clamped coordinates stay clamped.
  // out[j] < 0 marks a free coordinate during the loop.
  double budget = radius;
  for (std::size_t j = 0; j < v.size(); ++j) out[j] = ub[j] > 0.0 ? -1.0 : 0.0;
  double theta = 0.0;
  while (budget > 0.0) {
    scratch.clear();
    double free_total = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (out[j] < 0.0) {
        scratch.push_back(v[j]);
        free_total += v[j];
      }
    }
    theta = free_total > budget ? l1_threshold(scratch, budget) : 0.0;
    bool changed = false;
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (out[j] < 0.0 && v[j] - theta > ub[j]) {
        out[j] = ub[j];
        budget -= ub[j];
        changed = true;
      }
    }
    if (!changed) break;
  }
  for (std::size_t j = 0; j < v.size(); ++j) {
    if (out[j] < 0.0) out[j] = budget > 0.0 ? std::max(v[j] - theta, 0.0) : 0.0;
  }
}

std::vector<double> project_l1_ball_box(std::span<const double> v, double radius,
                                        std::span<const double> ub) {
  std::vector<double> out(v.size());
  std::vector<double> scratch;
  project_l1_ball_box(v, radius, ub, out, scratch);
  return out;
}

}  // namespace structflow
