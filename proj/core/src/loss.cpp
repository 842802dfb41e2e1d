#include "structflow/loss.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace structflow {

namespace {

// log(1 + e^x) without overflow.
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

// 1 / (1 + e^-x).
double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

void check_length(std::size_t got, std::size_t want) {
  if (got != want) throw std::invalid_argument("loss: vector length differs from the sample count");
}

}  // namespace

Loss Loss::square(std::vector<double> y) { return Loss(LossKind::kSquare, std::move(y)); }

Loss Loss::logistic(std::vector<double> labels) {
  for (double v : labels) {
    if (v != 1.0 && v != -1.0) throw std::invalid_argument("logistic loss: labels must be -1 or +1");
  }
  return Loss(LossKind::kLogistic, std::move(labels));
}

double Loss::value(std::span<const double> z) const {
  check_length(z.size(), y_.size());
  double sum = 0.0;
  if (kind_ == LossKind::kSquare) {
    for (std::size_t i = 0; i < z.size(); ++i) sum += 0.5 * (y_[i] - z[i]) * (y_[i] - z[i]);
  } else {
    for (std::size_t i = 0; i < z.size(); ++i) sum += softplus(-y_[i] * z[i]);
  }
  return sum;
}

void Loss::gradient(std::span<const double> z, std::span<double> out) const {
  check_length(z.size(), y_.size());
  check_length(out.size(), y_.size());
  if (kind_ == LossKind::kSquare) {
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i] - y_[i];
  } else {
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = -y_[i] * sigmoid(-y_[i] * z[i]);
  }
}

double Loss::conjugate(std::span<const double> kappa) const {
  check_length(kappa.size(), y_.size());
  double sum = 0.0;
  if (kind_ == LossKind::kSquare) {
    for (std::size_t i = 0; i < kappa.size(); ++i) sum += 0.5 * kappa[i] * kappa[i] + kappa[i] * y_[i];
    return sum;
  }
  for (std::size_t i = 0; i < kappa.size(); ++i) {
    const double s = -y_[i] * kappa[i];
    if (s < 0.0 || s > 1.0) return std::numeric_limits<double>::infinity();
    sum += xlogx(s) + xlogx(1.0 - s);
  }
  return sum;
}

double Loss::prox_scalar(std::size_t i, double a, double t) const {
  if (kind_ == LossKind::kSquare) return (a + t * y_[i]) / (1.0 + t);
  if (t == 0.0) return a;
  // Newton on r − a − t·y·σ(−y r) = 0; the left side is increasing with
  // slope in [1, 1 + t/4], so safeguarded Newton converges fast.
  const double y = y_[i];
  double lo = a, hi = a + t * y;
  if (lo > hi) std::swap(lo, hi);
  double r = a;
  for (int it = 0; it < 100; ++it) {
    const double s = sigmoid(-y * r);
    const double g = r - a - t * y * s;
    if (g > 0.0) hi = r; else lo = r;
    const double step = g / (1.0 + t * s * (1.0 - s));
    double next = r - step;
    if (next <= lo || next >= hi) next = 0.5 * (lo + hi);
    if (std::abs(next - r) <= 1e-15 * (1.0 + std::abs(r))) return next;
    r = next;
  }
  return r;
}

void Loss::prox(std::span<const double> a, double t, std::span<double> out) const {
  check_length(a.size(), y_.size());
  check_length(out.size(), y_.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = prox_scalar(i, a[i], t);
}

}  // namespace structflow
