#include "structflow/linear_map.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace structflow {

namespace {

using ConstMap = Eigen::Map<const Eigen::VectorXd>;
using Map = Eigen::Map<Eigen::VectorXd>;

void check_size(std::size_t got, std::size_t want, const char* what) {
  if (got != want) throw std::invalid_argument(std::string("design matrix: ") + what);
}

}  // namespace

DesignMatrix::DesignMatrix(Dense x)
    : rows_(static_cast<std::size_t>(x.rows())),
      cols_(static_cast<std::size_t>(x.cols())),
      data_(std::move(x)) {}

DesignMatrix::DesignMatrix(Sparse x)
    : rows_(static_cast<std::size_t>(x.rows())), cols_(static_cast<std::size_t>(x.cols())) {
  x.makeCompressed();
  data_ = std::move(x);
}

DesignMatrix DesignMatrix::from_operator(std::size_t rows, std::size_t cols, Action apply,
                                         Action apply_transpose) {
  if (!apply || !apply_transpose) throw std::invalid_argument("design matrix: empty operator");
  DesignMatrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.data_ = Operator{std::move(apply), std::move(apply_transpose)};
  return m;
}

void DesignMatrix::apply(std::span<const double> w, std::span<double> out) const {
  check_size(w.size(), cols_, "input length differs from the column count");
  check_size(out.size(), rows_, "output length differs from the row count");
  const ConstMap in(w.data(), static_cast<Eigen::Index>(w.size()));
  Map res(out.data(), static_cast<Eigen::Index>(out.size()));
  if (const Dense* d = dense()) {
    res.noalias() = *d * in;
  } else if (const Sparse* s = sparse()) {
    res.noalias() = *s * in;
  } else if (const auto* op = std::get_if<Operator>(&data_)) {
    op->apply(w, out);
  } else if (rows_ > 0) {
    throw std::logic_error("design matrix: not initialised");
  }
}

void DesignMatrix::apply_transpose(std::span<const double> r, std::span<double> out) const {
  check_size(r.size(), rows_, "input length differs from the row count");
  check_size(out.size(), cols_, "output length differs from the column count");
  const ConstMap in(r.data(), static_cast<Eigen::Index>(r.size()));
  Map res(out.data(), static_cast<Eigen::Index>(out.size()));
  if (const Dense* d = dense()) {
    res.noalias() = d->transpose() * in;
  } else if (const Sparse* s = sparse()) {
    res.noalias() = s->transpose() * in;
  } else if (const auto* op = std::get_if<Operator>(&data_)) {
    op->apply_transpose(r, out);
  } else if (cols_ > 0) {
    throw std::logic_error("design matrix: not initialised");
  }
}

Eigen::VectorXd DesignMatrix::row(std::size_t i) const {
  if (i >= rows_) throw std::out_of_range("design matrix: row index");
  if (const Dense* d = dense()) return d->row(static_cast<Eigen::Index>(i)).transpose();
  if (const Sparse* s = sparse()) return Eigen::VectorXd(s->row(static_cast<Eigen::Index>(i)).transpose());
  throw std::logic_error("design matrix: rows of an operator are not available");
}

double DesignMatrix::spectral_norm_sq(std::size_t max_iter, double tol) const {
  if (rows_ == 0 || cols_ == 0) return 0.0;
  // A start vector with distinct entries avoids being orthogonal to the top
  // singular vector on structured matrices such as DCT dictionaries.
  std::vector<double> v(cols_), xv(rows_), next(cols_);
  for (std::size_t j = 0; j < cols_; ++j) v[j] = 1.0 + 0.5 * std::sin(1.0 + static_cast<double>(j));
  double estimate = 0.0;
  for (std::size_t it = 0; it < max_iter; ++it) {
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) return 0.0;
    for (double& x : v) x /= norm;
    apply(v, xv);
    apply_transpose(xv, next);
    double rayleigh = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) rayleigh += v[j] * next[j];
    const bool done = std::abs(rayleigh - estimate) <= tol * std::max(rayleigh, 1e-300);
    estimate = rayleigh;
    v.swap(next);
    if (done) break;
  }
  return estimate;
}

}  // namespace structflow
