#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "structflow/flowgraph.hpp"

namespace structflow {

/// Capacities, (pre-)flow, excesses and height labels of one max-flow solve.
/// `capacity[a]` is +inf exactly for internal arcs.
struct FlowState {
  std::vector<double> capacity;
  std::vector<double> flow;
  std::vector<double> excess;
  std::vector<Index> height;
  double value = 0.0;  // total flow into the sink, Σ_j ξ̄_j
};

struct MaxFlowOptions {
  bool gap_heuristic = true;
  bool global_relabel = true;
  /// An arc is saturated when its residual is <= saturation_tol·max(1, cap).
  double saturation_tol = 1e-10;
  /// Return stranded excess to the source so that the result is a flow and
  /// not only a maximum pre-flow.
  bool complete = true;
};

struct MaxFlowStats {
  std::size_t pushes = 0;
  std::size_t relabels = 0;
  std::size_t global_relabels = 0;
  std::size_t gap_relabels = 0;

  MaxFlowStats& operator+=(const MaxFlowStats& o) {
    pushes += o.pushes;
    relabels += o.relabels;
    global_relabels += o.global_relabels;
    gap_relabels += o.gap_relabels;
    return *this;
  }
};

/// Zero flow with source capacities taken from the graph and the given sink
/// capacities (one per variable vertex).
FlowState make_flow_state(const FlowGraph& graph, std::span<const double> sink_caps);

/// Highest-label push-relabel with global relabeling (every |V| relabels)
/// and the gap heuristic. Returns a maximum flow.
FlowState max_flow(const FlowGraph& graph, std::span<const double> sink_caps,
                   const MaxFlowOptions& options = {}, MaxFlowStats* stats = nullptr);

/// Resumes from `prev` after the sink capacities changed. Flows above the new
/// capacities are truncated, the resulting excesses are pushed on, and
/// deficits are repaired downstream before push-relabel resumes. The flow
/// value equals that of a cold start.
FlowState warm_restart(const FlowGraph& graph, FlowState prev,
                       std::span<const double> new_sink_caps,
                       const MaxFlowOptions& options = {}, MaxFlowStats* stats = nullptr);

/// Turns any state whose flows respect 0 <= flow <= capacity into a valid
/// pre-flow (source arcs saturated, no deficits), then runs push-relabel.
/// With options.complete = false the result is a maximum pre-flow whose
/// stranded excess sits on the source side of the cut.
void solve_preflow(const FlowGraph& graph, FlowState& state, const MaxFlowOptions& options = {},
                   MaxFlowStats* stats = nullptr);

/// Sends stranded excess back towards the source. Requires an acyclic graph,
/// which every graph built from a group structure is.
void return_excess(const FlowGraph& graph, FlowState& state);

/// Minimum cut of a maximum flow: V⁺ is everything reachable from s through
/// non-saturated residual arcs. Throws std::logic_error if t is reachable,
/// i.e. the flow is not maximal.
Cut min_cut(const FlowGraph& graph, const FlowState& state, double saturation_tol = 1e-10);

/// Marks the vertices that can still reach t in the residual graph. After
/// solve_preflow these form the sink side of a minimum cut.
std::vector<char> reaches_sink(const FlowGraph& graph, const FlowState& state,
                               double saturation_tol = 1e-10);

}  // namespace structflow
