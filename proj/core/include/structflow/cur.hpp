#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "structflow/groups.hpp"
#include "structflow/linear_map.hpp"
#include "structflow/solvers.hpp"

namespace structflow {

// CUR-like factorisation of X (n×p) through
//   min_W ½‖X − XWX‖²_F + λ_row Σ_i ‖W^i‖∞ + λ_col Σ_j ‖W_j‖∞,  W ∈ R^{p×n}.
// Row i of W multiplies column i of X and column j of W multiplies row j
// of X, so XWX = C W_IJ R with C = X(:, I) and R = X(J, :), where I are the
// non-zero rows and J the non-zero columns of W.

struct CurOptions {
  /// Centre the columns of X and scale it to unit Frobenius norm first.
  bool normalize = true;
  /// Rows/columns of W whose sup norm is at or below this are discarded.
  double select_tol = 1e-10;
  FistaOptions fista{};
};

struct CurRefit {
  Eigen::MatrixXd C;  // n×|I|
  Eigen::MatrixXd U;  // |I|×|J|, C⁺XR⁺
  Eigen::MatrixXd R;  // |J|×p
  double explained_variance = 0.0;
};

struct CurResult {
  /// The matrix the factorisation refers to (normalised copy of the input).
  Eigen::MatrixXd X;
  Eigen::MatrixXd W;  // p×n
  std::vector<Index> rows;  // I, ascending
  std::vector<Index> cols;  // J, ascending
  /// 1 − ‖X − XWX‖²_F/‖X‖²_F.
  double explained_variance = 0.0;
  /// Refit core and its explained variance (equal to 0 when I or J is empty).
  Eigen::MatrixXd core;
  double refit_variance = 0.0;
  SolverTrace trace;
};

/// Centres columns and scales to unit Frobenius norm. Throws on a zero or
/// non-finite matrix.
Eigen::MatrixXd normalize_cur_input(const Eigen::MatrixXd& x);

/// Row groups (strided in column-major vec(W)) weighted λ_row, then column
/// groups (contiguous) weighted λ_col. Families with weight 0 are omitted.
GroupStructure cur_groups(std::size_t p, std::size_t n, double lambda_row, double lambda_col);

/// vec(W) ↦ vec(XWX) and its adjoint vec(R) ↦ vec(XᵀRXᵀ), column-major.
DesignMatrix cur_operator(const Eigen::MatrixXd& x);

CurResult cur_solve(const Eigen::MatrixXd& x, double lambda_row, double lambda_col,
                    const CurOptions& options = {});

/// C = X(:, I), R = X(J, :), U = C⁺XR⁺. Throws on an empty selection.
CurRefit cur_refit(const Eigen::MatrixXd& x, const std::vector<Index>& rows,
                   const std::vector<Index>& cols);

/// 1 − ‖X − CUR‖²_F/‖X‖²_F. Throws when ‖X‖_F = 0.
double explained_variance(const Eigen::MatrixXd& x, const Eigen::MatrixXd& c,
                          const Eigen::MatrixXd& u, const Eigen::MatrixXd& r);

/// Moore–Penrose inverse from a thin SVD, singular values below
/// cutoff·σ_max treated as zero.
Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& a, double cutoff = 1e-12);

/// Smallest λ_row (λ_col) that zeroes W on its own, i.e. the largest ℓ1
/// norm of a row (column) of XᵀXXᵀ, and a log-spaced grid below each. Pass
/// the normalised matrix when cur_solve normalises.
struct CurGrid {
  double row_max = 0.0;
  double col_max = 0.0;
  std::vector<double> rows;
  std::vector<double> cols;
};
CurGrid cur_grid(const Eigen::MatrixXd& x, std::size_t size, double decades = 2.0);

/// X = P M Q + noise·N(0, 1): M is rank×rank Gaussian, P is the identity on
/// `planted_rows` and uniform in [−0.1, 0.1] elsewhere, Q likewise on
/// `planted_cols`, so
/// X = X(:, I₀) M⁻¹ X(J₀, :) exactly without noise.
struct PlantedCur {
  Eigen::MatrixXd X;
  std::vector<Index> planted_rows;  // J₀ ⊂ rows of X (columns of W)
  std::vector<Index> planted_cols;  // I₀ ⊂ columns of X (rows of W)
};
PlantedCur planted_cur_matrix(std::size_t n, std::size_t p, std::size_t rank, double noise,
                              std::uint64_t seed);

/// `num_rows` rows of W (columns of X) and `num_cols` columns of W (rows of
/// X) drawn uniformly without replacement. A weak baseline for comparison
/// only; not a method from the literature this library implements.
std::pair<std::vector<Index>, std::vector<Index>> random_cur_selection(std::size_t n, std::size_t p,
                                                                       std::size_t num_rows,
                                                                       std::size_t num_cols,
                                                                       std::uint64_t seed);

}  // namespace structflow
