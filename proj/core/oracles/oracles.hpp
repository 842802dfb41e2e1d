#pragma once

// Slow, plain reference implementations used to cross-check the library.
// They read GroupStructure and FlowGraph data but share no algorithmic code
// with the production paths.

#include <span>
#include <tuple>
#include <vector>

#include "structflow/flowgraph.hpp"
#include "structflow/groups.hpp"

namespace structflow::oracle {

struct DualProxResult {
  std::vector<double> w;
  std::vector<double> xi_bar;
  std::vector<std::vector<double>> group_flows;  // aligned with gs.group(g)
  std::vector<double> objective;                 // dual objective after each sweep
  std::size_t sweeps = 0;
  bool converged = false;
};

/// Cyclic block-coordinate minimization of the dual of the prox: each block
/// update projects the group residual onto {ξ >= 0, Σξ <= λη_g}. Stops after
/// `max_sweeps` or when no entry moves by more than `change_tol` in a sweep.
DualProxResult prox_dual(std::span<const double> u, const GroupStructure& gs, double lambda,
                         std::size_t max_sweeps = 1000000, double change_tol = 1e-12,
                         bool keep_objective = false);

/// Ω*(κ) by bisection on τ; τ is feasible when a reference max-flow with
/// source capacities τη_g saturates every sink capacity |κ_j|.
double dual_norm_bisect(std::span<const double> kappa, const GroupStructure& gs, double tol = 1e-12);

/// Edmonds–Karp on an explicit arc list (tail, head, capacity); capacity may
/// be +inf.
double edmonds_karp(int num_vertices, int source, int sink,
                    const std::vector<std::tuple<int, int, double>>& arcs);

/// Max-flow value of a flow graph with the given sink capacities.
double max_flow_ek(const FlowGraph& graph, std::span<const double> sink_caps);

/// Sort-based projection onto {γ >= 0, Σγ <= radius} for non-negative v.
std::vector<double> sorted_l1_projection(std::span<const double> v, double radius);

/// Box-constrained variant by bisection on the threshold.
std::vector<double> bisect_l1_box_projection(std::span<const double> v, double radius,
                                             std::span<const double> ub);

/// Ω(w) = Σ_g η_g ‖w_g‖∞ evaluated directly.
double omega_linf(std::span<const double> w, const GroupStructure& gs);

}  // namespace structflow::oracle
