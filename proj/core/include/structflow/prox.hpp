#pragma once

#include <optional>
#include <span>
#include <vector>

#include "structflow/certificate.hpp"
#include "structflow/flowgraph.hpp"
#include "structflow/groups.hpp"
#include "structflow/maxflow.hpp"

namespace structflow {

struct ProxOptions {
  /// Box bounds ub_j = λ Σ_{g ∋ j} η_g in the projection step.
  bool improved_projection = true;
  /// Split into connected components before solving and after every cut.
  bool use_components = true;
  /// Collapse nested groups (declared hints, or detected below nesting_cap).
  bool simplify_nested = true;
  std::size_t nesting_cap = 2000;
  /// Recover ξ^g for every group. Implied by certify.
  bool keep_group_flows = false;
  /// Attach an optimality certificate to the result.
  bool certify = false;
  /// A sink arc counts as saturated when ξ̄_j >= γ_j - termination_tol·(1 + γ_j).
  double termination_tol = 1e-9;
  /// Worker threads over top-level components. 0 reads STRUCTFLOW_THREADS
  /// and falls back to 1.
  unsigned threads = 0;
  MaxFlowOptions maxflow{};
};

struct ProxStats {
  std::size_t components = 0;
  std::size_t max_flow_calls = 0;
  std::size_t splits = 0;
  std::size_t degenerate_cuts = 0;
  MaxFlowStats maxflow{};

  ProxStats& operator+=(const ProxStats& o) {
    components += o.components;
    max_flow_calls += o.max_flow_calls;
    splits += o.splits;
    degenerate_cuts += o.degenerate_cuts;
    maxflow += o.maxflow;
    return *this;
  }
};

struct ProxResult {
  std::vector<double> w;
  std::vector<double> xi_bar;
  /// ξ^g restricted to g, aligned with gs.group(g). Empty unless requested.
  std::vector<std::vector<double>> group_flows;
  std::optional<ProxCertificate> certificate;
  ProxStats stats;
};

/// Exact prox of λ Σ_g η_g ‖w_g‖∞ for arbitrary overlapping groups.
/// Negative coordinates are handled by sign flips. λ = 0 returns u.
/// Throws std::invalid_argument on a dimension mismatch, a negative or
/// non-finite λ, or non-finite u.
ProxResult prox_overlapping_linf(std::span<const double> u, const GroupStructure& gs,
                                 double lambda, const ProxOptions& options = {});

/// One recorded split: original ids on each side of the cut.
struct SplitRecord {
  std::vector<Index> source_variables;
  std::vector<Index> source_groups;
  std::vector<Index> sink_variables;
  std::vector<Index> sink_groups;
};

struct FlowResult {
  /// ξ̄ per variable vertex of the input graph.
  std::vector<double> xi_bar;
  /// Flow on every arc of the root graph (indexed by origin id). Only
  /// filled when options.keep_group_flows is set.
  std::vector<double> arc_flow;
  std::vector<SplitRecord> splits;
  ProxStats stats;
};

/// Solves the quadratic min-cost flow on `graph` (targets u >= 0 and λ are
/// read from the graph) by the projection / max-flow / cut recursion.
/// `record_splits` keeps every cut for inspection.
FlowResult compute_flow(const FlowGraph& graph, const ProxOptions& options = {},
                        bool record_splits = false);

/// sign(u_j)(|u_j| - λ)_+.
std::vector<double> prox_l1(std::span<const double> u, double lambda);

/// Block soft-thresholding on non-overlapping groups. Uncovered coordinates
/// are left unchanged. Throws on overlapping groups.
std::vector<double> prox_group_l2(std::span<const double> u, const GroupStructure& gs,
                                  double lambda);

/// u_g - Π_{‖·‖₁ <= λη_g}(u_g) per non-overlapping group.
std::vector<double> prox_group_linf(std::span<const double> u, const GroupStructure& gs,
                                    double lambda);

/// Composition of the per-group proxes, children before parents. Throws
/// std::invalid_argument when the groups are not tree-structured.
std::vector<double> prox_tree(std::span<const double> u, const GroupStructure& gs, double lambda,
                              NormKind norm);

/// Per-group prox in place: x ← prox_{t‖·‖}(x).
void prox_single_group(std::span<double> x, double t, NormKind norm, std::vector<double>& scratch);

/// Dispatches to the exact prox for the structure: closed forms for
/// partitions and trees, the flow algorithm for overlapping ℓ∞ groups.
/// Throws for overlapping ℓ2 groups that are not tree-structured.
std::vector<double> prox_exact(std::span<const double> u, const GroupStructure& gs, double lambda,
                               NormKind norm, const ProxOptions& options = {});

/// Whether prox_exact supports the structure.
bool has_exact_prox(const GroupStructure& gs, NormKind norm);

}  // namespace structflow
