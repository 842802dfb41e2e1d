#pragma once

#include <span>
#include <vector>

#include "structflow/groups.hpp"

namespace structflow {

struct GroupCheck {
  Index group = 0;
  double w_inf = 0.0;          // ‖w_g‖∞
  double flow_l1 = 0.0;        // ‖ξ^g‖₁
  double complementarity = 0.0;  // |w_g·ξ^g - ‖w_g‖∞‖ξ^g‖₁|
  double capacity_gap = 0.0;     // |‖ξ^g‖₁ - λη_g|
  bool ok = false;
};

/// Optimality report for a prox solution (w, ξ). Besides the per-group
/// conditions it checks w = u - Σ_g ξ^g, Supp(ξ^g) ⊆ g (by construction of
/// the aligned layout), sign consistency and ‖ξ^g‖₁ <= λη_g.
struct ProxCertificate {
  double tolerance = 0.0;
  double max_complementarity = 0.0;
  double max_capacity_gap = 0.0;    // over groups with w_g != 0
  double max_infeasibility = 0.0;   // max_g (‖ξ^g‖₁ - λη_g)_+
  double reconstruction_error = 0.0;  // ‖u - Σξ^g - w‖∞
  std::vector<GroupCheck> groups;
  bool passed = false;
};

/// `flows[g]` holds ξ^g on gs.group(g). tol defaults to 1e-8·(1 + ‖u‖∞).
ProxCertificate certify_prox(std::span<const double> u, const GroupStructure& gs, double lambda,
                             std::span<const double> w,
                             const std::vector<std::vector<double>>& flows, double tol = -1.0);

}  // namespace structflow
