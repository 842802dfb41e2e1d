#pragma once

#include <span>

#include "structflow/groups.hpp"
#include "structflow/linear_map.hpp"
#include "structflow/loss.hpp"
#include "structflow/maxflow.hpp"

namespace structflow {

/// Ω(w) = Σ_g η_g ‖w_g‖ with ‖·‖ the ℓ2 or ℓ∞ norm.
double omega(std::span<const double> w, const GroupStructure& gs, NormKind norm);

struct DualNormOptions {
  /// Stop once every sink arc carries κ_j up to termination_tol·(1 + κ_j).
  double termination_tol = 1e-9;
  bool use_components = true;
  MaxFlowOptions maxflow{};
};

struct DualNormStats {
  std::size_t max_flow_calls = 0;
  std::size_t splits = 0;
};

/// Ω*(κ) = max { z·κ : Ω(z) <= 1 }.
///
/// ℓ∞ groups: the smallest τ for which a flow with source capacities τη_g
/// saturates every sink arc |κ_j|, found by raising τ to Σκ/Ση on the part
/// of the graph that still cannot be saturated. ℓ2 groups: closed form on
/// non-overlapping groups, bisection on the tree prox otherwise (overlapping
/// ℓ2 groups outside a tree throw std::invalid_argument).
/// Returns +inf when κ is non-zero on a coordinate no group covers.
double dual_norm(std::span<const double> kappa, const GroupStructure& gs,
                 NormKind norm = NormKind::kLinf, const DualNormOptions& options = {},
                 DualNormStats* stats = nullptr);

/// The pieces of a duality-gap evaluation for min f(Xw) + λΩ(w).
struct GapEvaluation {
  double primal = 0.0;     // f(Xw) + λΩ(w)
  double dual = 0.0;       // −f*(−κ)
  double gap = 0.0;        // primal − dual
  double rho = 1.0;        // κ = −∇f(Xw)/ρ
  double dual_norm = 0.0;  // Ω*(Xᵀ∇f(Xw))
};

/// Duality gap at w with the dual candidate κ = −ρ⁻¹∇f(Xw),
/// ρ = max(Ω*(Xᵀ∇f(Xw))/λ, 1). For λ = 0 the candidate is ∇f rescaled only
/// when Ω* is exactly zero and κ = 0 otherwise. The gap is +inf when Ω* is
/// not available (overlapping ℓ2 groups) or κ leaves the domain of f*.
GapEvaluation evaluate_gap(std::span<const double> w, const DesignMatrix& x, const Loss& loss,
                           double lambda, const GroupStructure& gs, NormKind norm = NormKind::kLinf);

double duality_gap(std::span<const double> w, const DesignMatrix& x, const Loss& loss, double lambda,
                   const GroupStructure& gs, NormKind norm = NormKind::kLinf);

}  // namespace structflow
