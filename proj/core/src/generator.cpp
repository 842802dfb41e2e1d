#include "structflow/generator.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "structflow/random.hpp"

namespace structflow {

GroupFamily parse_group_family(const std::string& name) {
  if (name == "windows3") return GroupFamily::kWindows3;
  if (name == "grid3x3") return GroupFamily::kGrid3x3;
  throw std::invalid_argument("unknown group family '" + name + "' (expected windows3 or grid3x3)");
}

const char* to_string(GroupFamily family) {
  return family == GroupFamily::kWindows3 ? "windows3" : "grid3x3";
}

Eigen::MatrixXd cosine_dictionary_1d(std::size_t n, std::size_t p) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (std::size_t k = 0; k < p; ++k) {
    const double omega = std::numbers::pi * static_cast<double>(k) / static_cast<double>(p);
    for (std::size_t i = 0; i < n; ++i) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          std::cos(omega * (static_cast<double>(i) + 0.5));
    }
  }
  x.colwise().normalize();
  return x;
}

std::pair<std::size_t, std::size_t> grid_shape(std::size_t count) {
  if (count == 0) throw std::invalid_argument("grid_shape: zero size");
  std::size_t h = static_cast<std::size_t>(std::sqrt(static_cast<double>(count)));
  while (h > 1 && count % h != 0) --h;
  return {h, count / h};
}

Eigen::MatrixXd cosine_dictionary_2d(std::size_t n, std::size_t p) {
  const auto [h, w] = grid_shape(p);
  const auto [n1, n2] = grid_shape(n);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (std::size_t a = 0; a < h; ++a) {
    for (std::size_t b = 0; b < w; ++b) {
      const double wa = std::numbers::pi * static_cast<double>(a) / static_cast<double>(h);
      const double wb = std::numbers::pi * static_cast<double>(b) / static_cast<double>(w);
      const auto col = static_cast<Eigen::Index>(a * w + b);
      for (std::size_t i1 = 0; i1 < n1; ++i1) {
        for (std::size_t i2 = 0; i2 < n2; ++i2) {
          x(static_cast<Eigen::Index>(i1 * n2 + i2), col) =
              std::cos(wa * (static_cast<double>(i1) + 0.5)) * std::cos(wb * (static_cast<double>(i2) + 0.5));
        }
      }
    }
  }
  x.colwise().normalize();
  return x;
}

GeneratedProblem gen_problem(std::uint64_t seed, std::size_t n, std::size_t p, GroupFamily family,
                             double sparsity, double noise) {
  if (n == 0 || p == 0) throw std::invalid_argument("gen_problem: n and p must be positive");
  if (!(sparsity >= 0.0 && sparsity <= 1.0)) throw std::invalid_argument("gen_problem: sparsity outside [0, 1]");
  if (!(noise >= 0.0)) throw std::invalid_argument("gen_problem: noise must be non-negative");
  GeneratedProblem out;
  if (family == GroupFamily::kWindows3) {
    if (p < 3) throw std::invalid_argument("gen_problem: windows3 needs p >= 3");
    out.X = cosine_dictionary_1d(n, p);
    out.groups = make_sliding_windows(p, 3);
  } else {
    const auto [h, w] = grid_shape(p);
    if (h < 3) {
      throw std::invalid_argument("gen_problem: grid3x3 needs p = h*w with 3 <= h <= w; got p = " +
                                  std::to_string(p));
    }
    out.X = cosine_dictionary_2d(n, p);
    out.groups = make_grid_squares(h, w, 3, false);
  }

  SplitMix64 rng(seed);
  std::vector<char> zero(p, 0);
  std::size_t zeros = 0;
  const auto target = static_cast<std::size_t>(std::ceil((1.0 - sparsity) * static_cast<double>(p) - 1e-9));
  while (zeros < target) {
    const std::size_t g = rng.below(out.groups.size());
    for (Index j : out.groups.group(g)) {
      if (!zero[j]) {
        zero[j] = 1;
        ++zeros;
      }
    }
  }
  out.w0.assign(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    if (!zero[j]) out.w0[j] = rng.uniform(-1.0, 1.0);
  }

  const Eigen::VectorXd signal =
      out.X * Eigen::Map<const Eigen::VectorXd>(out.w0.data(), static_cast<Eigen::Index>(p));
  const double sigma = std::sqrt(noise) * signal.norm();
  out.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.y[i] = signal[static_cast<Eigen::Index>(i)] + sigma * rng.normal();
  return out;
}

}  // namespace structflow
