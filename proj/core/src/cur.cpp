#include "structflow/cur.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "structflow/random.hpp"

namespace structflow {

namespace {

using ConstMatMap = Eigen::Map<const Eigen::MatrixXd>;
using MatMap = Eigen::Map<Eigen::MatrixXd>;

std::vector<Index> sample_without_replacement(SplitMix64& rng, std::size_t n, std::size_t k) {
  std::vector<Index> all(n);
  std::iota(all.begin(), all.end(), Index{0});
  for (std::size_t i = 0; i < k && i < n; ++i) {
    std::swap(all[i], all[i + rng.below(n - i)]);
  }
  all.resize(std::min(k, n));
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace

Eigen::MatrixXd normalize_cur_input(const Eigen::MatrixXd& x) {
  if (!x.allFinite()) throw std::invalid_argument("cur: non-finite entries in X");
  Eigen::MatrixXd out = x.rowwise() - x.colwise().mean();
  const double norm = out.norm();
  if (norm == 0.0) throw std::invalid_argument("cur: X is zero after centring");
  return out / norm;
}

GroupStructure cur_groups(std::size_t p, std::size_t n, double lambda_row, double lambda_col) {
  if (lambda_row < 0.0 || lambda_col < 0.0) throw std::invalid_argument("cur: negative lambda");
  std::vector<std::vector<Index>> groups;
  std::vector<double> weights;
  if (lambda_row > 0.0) {
    for (std::size_t i = 0; i < p; ++i) {
      std::vector<Index> g(n);
      for (std::size_t j = 0; j < n; ++j) g[j] = static_cast<Index>(i + p * j);
      groups.push_back(std::move(g));
      weights.push_back(lambda_row);
    }
  }
  if (lambda_col > 0.0) {
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<Index> g(p);
      std::iota(g.begin(), g.end(), static_cast<Index>(p * j));
      groups.push_back(std::move(g));
      weights.push_back(lambda_col);
    }
  }
  return GroupStructure(p * n, groups, std::move(weights));
}

DesignMatrix cur_operator(const Eigen::MatrixXd& x) {
  const auto n = x.rows(), p = x.cols();
  auto forward = [x, n, p](std::span<const double> in, std::span<double> out) {
    MatMap(out.data(), n, p).noalias() = x * ConstMatMap(in.data(), p, n) * x;
  };
  auto adjoint = [x, n, p](std::span<const double> in, std::span<double> out) {
    MatMap(out.data(), p, n).noalias() = x.transpose() * ConstMatMap(in.data(), n, p) * x.transpose();
  };
  return DesignMatrix::from_operator(static_cast<std::size_t>(n * p), static_cast<std::size_t>(p * n),
                                     forward, adjoint);
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& a, double cutoff) {
  if (a.size() == 0) return Eigen::MatrixXd(a.cols(), a.rows());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double floor = cutoff * (s.size() > 0 ? s[0] : 0.0);
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    if (s[k] > floor && s[k] > 0.0) inv[k] = 1.0 / s[k];
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

double explained_variance(const Eigen::MatrixXd& x, const Eigen::MatrixXd& c, const Eigen::MatrixXd& u,
                          const Eigen::MatrixXd& r) {
  const double total = x.squaredNorm();
  if (total == 0.0) throw std::invalid_argument("explained_variance: X is zero");
  return 1.0 - (x - c * u * r).squaredNorm() / total;
}

CurRefit cur_refit(const Eigen::MatrixXd& x, const std::vector<Index>& rows,
                   const std::vector<Index>& cols) {
  if (rows.empty() || cols.empty()) throw std::invalid_argument("cur_refit: empty selection");
  CurRefit fit;
  fit.C.resize(x.rows(), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) fit.C.col(static_cast<Eigen::Index>(k)) = x.col(rows[k]);
  fit.R.resize(static_cast<Eigen::Index>(cols.size()), x.cols());
  for (std::size_t k = 0; k < cols.size(); ++k) fit.R.row(static_cast<Eigen::Index>(k)) = x.row(cols[k]);
  fit.U = pseudo_inverse(fit.C) * x * pseudo_inverse(fit.R);
  fit.explained_variance = explained_variance(x, fit.C, fit.U, fit.R);
  return fit;
}

CurResult cur_solve(const Eigen::MatrixXd& x_in, double lambda_row, double lambda_col,
                    const CurOptions& options) {
  if (!x_in.allFinite()) throw std::invalid_argument("cur: non-finite entries in X");
  CurResult res;
  res.X = options.normalize ? normalize_cur_input(x_in) : x_in;
  const Eigen::MatrixXd& x = res.X;
  const auto n = static_cast<std::size_t>(x.rows()), p = static_cast<std::size_t>(x.cols());

  Problem problem;
  problem.x = cur_operator(x);
  problem.loss = Loss::square(std::vector<double>(x.data(), x.data() + x.size()));
  problem.lambda = 1.0;
  problem.groups = cur_groups(p, n, lambda_row, lambda_col);
  problem.norm = NormKind::kLinf;
  SolverResult sol = fista(problem, options.fista);
  res.trace = std::move(sol.trace);
  res.W = MatMap(sol.w.data(), static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(n));

  // Exact zeros come from the prox; the threshold only guards against dust.
  const Eigen::VectorXd row_sup = res.W.cwiseAbs().rowwise().maxCoeff();
  const Eigen::VectorXd col_sup = res.W.cwiseAbs().colwise().maxCoeff().transpose();
  for (std::size_t i = 0; i < p; ++i) {
    if (row_sup[static_cast<Eigen::Index>(i)] > options.select_tol) res.rows.push_back(static_cast<Index>(i));
    else res.W.row(static_cast<Eigen::Index>(i)).setZero();
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (col_sup[static_cast<Eigen::Index>(j)] > options.select_tol) res.cols.push_back(static_cast<Index>(j));
    else res.W.col(static_cast<Eigen::Index>(j)).setZero();
  }
  res.explained_variance = 1.0 - (x - x * res.W * x).squaredNorm() / x.squaredNorm();
  if (!res.rows.empty() && !res.cols.empty()) {
    CurRefit fit = cur_refit(x, res.rows, res.cols);
    res.core = std::move(fit.U);
    res.refit_variance = fit.explained_variance;
  } else {
    res.refit_variance = 0.0;
  }
  return res;
}

CurGrid cur_grid(const Eigen::MatrixXd& x, std::size_t size, double decades) {
  if (size == 0) throw std::invalid_argument("cur_grid: empty grid");
  // At W = 0 the gradient of the loss is −XᵀXXᵀ.
  const Eigen::MatrixXd g = x.transpose() * x * x.transpose();
  CurGrid grid;
  grid.row_max = g.cwiseAbs().rowwise().sum().maxCoeff();
  grid.col_max = g.cwiseAbs().colwise().sum().maxCoeff();
  for (std::size_t k = 0; k < size; ++k) {
    const double e = size == 1 ? 0.0 : -decades * (1.0 - static_cast<double>(k) / static_cast<double>(size - 1));
    grid.rows.push_back(grid.row_max * std::pow(10.0, e));
    grid.cols.push_back(grid.col_max * std::pow(10.0, e));
  }
  return grid;
}

PlantedCur planted_cur_matrix(std::size_t n, std::size_t p, std::size_t rank, double noise,
                              std::uint64_t seed) {
  if (rank == 0 || rank > std::min(n, p)) throw std::invalid_argument("planted_cur_matrix: bad rank");
  SplitMix64 rng(seed);
  PlantedCur out;
  out.planted_rows = sample_without_replacement(rng, n, rank);
  out.planted_cols = sample_without_replacement(rng, p, rank);
  const auto r = static_cast<Eigen::Index>(rank);
  Eigen::MatrixXd m(r, r);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  Eigen::MatrixXd left(static_cast<Eigen::Index>(n), r), right(r, static_cast<Eigen::Index>(p));
  for (Eigen::Index i = 0; i < left.size(); ++i) left.data()[i] = rng.uniform(-0.1, 0.1);
  for (Eigen::Index i = 0; i < right.size(); ++i) right.data()[i] = rng.uniform(-0.1, 0.1);
  for (std::size_t k = 0; k < rank; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    left.row(out.planted_rows[k]).setZero();
    left(out.planted_rows[k], kk) = 1.0;
    right.col(out.planted_cols[k]).setZero();
    right(kk, out.planted_cols[k]) = 1.0;
  }
  out.X = left * m * right;
  for (Eigen::Index i = 0; i < out.X.size(); ++i) out.X.data()[i] += noise * rng.normal();
  return out;
}

std::pair<std::vector<Index>, std::vector<Index>> random_cur_selection(std::size_t n, std::size_t p,
                                                                       std::size_t num_rows,
                                                                       std::size_t num_cols,
                                                                       std::uint64_t seed) {
  SplitMix64 rng(seed);
  auto cols_of_x = sample_without_replacement(rng, p, num_rows);
  auto rows_of_x = sample_without_replacement(rng, n, num_cols);
  return {std::move(cols_of_x), std::move(rows_of_x)};
}

}  // namespace structflow
