#pragma once

#include <span>
#include <vector>

namespace structflow {

enum class LossKind { kSquare, kLogistic };

/// A separable loss f(z) = Σ_i φ_i(z_i) on the predictions z = Xw.
///   square:   φ_i(z) = ½(y_i − z)²
///   logistic: φ_i(z) = log(1 + exp(−y_i z)), y_i ∈ {−1, +1}
class Loss {
 public:
  Loss() = default;
  static Loss square(std::vector<double> y);
  /// Throws std::invalid_argument unless every label is −1 or +1.
  static Loss logistic(std::vector<double> labels);

  LossKind kind() const { return kind_; }
  std::span<const double> y() const { return y_; }
  std::size_t size() const { return y_.size(); }

  double value(std::span<const double> z) const;
  void gradient(std::span<const double> z, std::span<double> out) const;

  /// Fenchel conjugate f*(κ) = sup_z κ·z − f(z); +inf outside the domain.
  ///   square:   ½‖κ‖² + κ·y
  ///   logistic: Σ s_i log s_i + (1 − s_i) log(1 − s_i), s_i = −y_i κ_i ∈ [0, 1]
  double conjugate(std::span<const double> kappa) const;

  /// Bound on the second derivative of every φ_i (1 and ¼). Times ‖X‖₂² it
  /// gives a Lipschitz constant of ∇(f∘X).
  double curvature() const { return kind_ == LossKind::kSquare ? 1.0 : 0.25; }

  /// argmin_r ½(r − a)² + t φ_i(r) for t >= 0.
  double prox_scalar(std::size_t i, double a, double t) const;
  /// Coordinate-wise prox of t·f.
  void prox(std::span<const double> a, double t, std::span<double> out) const;

 private:
  Loss(LossKind kind, std::vector<double> y) : kind_(kind), y_(std::move(y)) {}

  LossKind kind_ = LossKind::kSquare;
  std::vector<double> y_;
};

}  // namespace structflow
