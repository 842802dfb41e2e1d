#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <functional>
#include <span>
#include <variant>

namespace structflow {

/// The design matrix X (n×p) of a regression problem: a dense matrix, a
/// column-major sparse matrix, or a matrix-free operator given by its action
/// and the action of its transpose.
class DesignMatrix {
 public:
  using Dense = Eigen::MatrixXd;
  using Sparse = Eigen::SparseMatrix<double>;
  /// out = op(in); `in` and `out` never alias.
  using Action = std::function<void(std::span<const double> in, std::span<double> out)>;

  DesignMatrix() = default;
  explicit DesignMatrix(Dense x);
  explicit DesignMatrix(Sparse x);
  static DesignMatrix from_operator(std::size_t rows, std::size_t cols, Action apply,
                                    Action apply_transpose);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  /// out = X w.
  void apply(std::span<const double> w, std::span<double> out) const;
  /// out = Xᵀ r.
  void apply_transpose(std::span<const double> r, std::span<double> out) const;

  const Dense* dense() const { return std::get_if<Dense>(&data_); }
  const Sparse* sparse() const { return std::get_if<Sparse>(&data_); }
  bool is_explicit() const { return dense() || sparse(); }

  /// Row i as a dense vector; explicit matrices only.
  Eigen::VectorXd row(std::size_t i) const;

  /// Estimate of ‖X‖₂² by power iteration on XᵀX from a fixed start vector.
  /// Stops when the relative change drops below `tol`.
  double spectral_norm_sq(std::size_t max_iter = 500, double tol = 1e-10) const;

 private:
  struct Operator {
    Action apply;
    Action apply_transpose;
  };

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::variant<std::monostate, Dense, Sparse, Operator> data_;
};

}  // namespace structflow
