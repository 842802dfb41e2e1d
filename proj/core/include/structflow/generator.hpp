#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "structflow/groups.hpp"

namespace structflow {

enum class GroupFamily {
  kWindows3,  // every run of 3 consecutive atoms on a line
  kGrid3x3,   // every 3×3 square of atoms on a 2-D grid
};

/// "windows3" or "grid3x3"; throws std::invalid_argument otherwise.
GroupFamily parse_group_family(const std::string& name);
const char* to_string(GroupFamily family);

/// n×p dictionary of sampled cosines: atom k is cos(π k (i + ½)/p) at
/// i = 0..n−1, normalised to unit ℓ2 norm. Neighbouring atoms have close
/// frequencies, hence correlated columns along the line.
Eigen::MatrixXd cosine_dictionary_1d(std::size_t n, std::size_t p);

/// Shape of the 2-D layout used for `count` items: h is the largest divisor
/// of `count` not above √count, w = count/h.
std::pair<std::size_t, std::size_t> grid_shape(std::size_t count);

/// Separable 2-D cosines: atoms on the grid_shape(p) grid, signals on the
/// grid_shape(n) grid, atom (a, b) sampled as
/// cos(π a (i₁ + ½)/h)·cos(π b (i₂ + ½)/w), normalised to unit ℓ2 norm.
Eigen::MatrixXd cosine_dictionary_2d(std::size_t n, std::size_t p);

struct GeneratedProblem {
  Eigen::MatrixXd X;
  std::vector<double> y;
  std::vector<double> w0;
  GroupStructure groups;
};

/// y = Xw₀ + ε with ε_i ~ N(0, noise·‖Xw₀‖²). The zero pattern of w₀ is a
/// union of randomly drawn groups grown until it covers at least
/// (1 − sparsity)·p coordinates; the remaining entries are uniform in
/// [−1, 1]. All randomness comes from SplitMix64(seed).
GeneratedProblem gen_problem(std::uint64_t seed, std::size_t n, std::size_t p, GroupFamily family,
                             double sparsity = 0.2, double noise = 0.01);

}  // namespace structflow
