#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "structflow/groups.hpp"

namespace structflow {

enum class ArcKind : std::uint8_t {
  kSource,    // (s, g), capacity λη_g
  kInternal,  // (g, j) or (g, h), unbounded
  kSink,      // (j, t), capacity supplied per max-flow solve
};

struct Arc {
  Index tail = 0;
  Index head = 0;
  ArcKind kind = ArcKind::kInternal;
  /// Meaningful for source arcs only. Internal arcs are unbounded by kind,
  /// never by a large number.
  double capacity = 0.0;
};

/// Flow network for the proximal problem (or a piece of it after cuts).
///
/// Vertex layout: variable vertices [0, nv), group vertices [nv, nv + ng),
/// then the source and the sink. Every group vertex has exactly one source
/// arc, every variable vertex exactly one sink arc, and the quadratic cost
/// ½(u_j - ξ̄_j)² lives on the sink arc of variable j through `targets()`.
///
/// Residual arcs are addressed by id r: r = 2a walks arc a forward and
/// r = 2a + 1 walks it backward, so the paired arc is always r ^ 1.
class FlowGraph {
 public:
  FlowGraph() = default;

  Index num_variables() const { return static_cast<Index>(variable_ids_.size()); }
  Index num_groups() const { return static_cast<Index>(group_ids_.size()); }
  Index num_vertices() const { return num_variables() + num_groups() + 2; }
  Index source() const { return num_variables() + num_groups(); }
  Index sink() const { return source() + 1; }
  bool is_variable(Index v) const { return v < num_variables(); }
  bool is_group(Index v) const { return v >= num_variables() && v < source(); }
  Index group_vertex(Index k) const { return num_variables() + k; }

  std::size_t num_arcs() const { return arcs_.size(); }
  std::span<const Arc> arcs() const { return arcs_; }
  const Arc& arc(Index a) const { return arcs_[a]; }

  /// Residual arc ids leaving vertex v (forward arcs out of v and backward
  /// arcs into v), in arc order.
  std::span<const Index> incident(Index v) const {
    return {incident_.data() + incident_offsets_[v],
            incident_.data() + incident_offsets_[v + 1]};
  }
  Index residual_head(Index r) const {
    const Arc& a = arcs_[r >> 1];
    return (r & 1) ? a.tail : a.head;
  }
  Index residual_tail(Index r) const {
    const Arc& a = arcs_[r >> 1];
    return (r & 1) ? a.head : a.tail;
  }

  /// Original coordinate of each variable vertex.
  std::span<const Index> variable_ids() const { return variable_ids_; }
  /// Original group id of each group vertex (index k ↦ vertex nv + k).
  std::span<const Index> group_ids() const { return group_ids_; }
  std::span<const double> group_weights() const { return group_weights_; }
  /// u_j per variable vertex.
  std::span<const double> targets() const { return targets_; }
  double lambda() const { return lambda_; }

  /// Arc id of the sink arc of each variable vertex.
  std::span<const Index> sink_arcs() const { return sink_arc_; }
  /// Arc id of the source arc of each group vertex (by group index k).
  std::span<const Index> source_arcs() const { return source_arc_; }
  /// Arc id in the graph this one was cut out of, or its own id for a root.
  std::span<const Index> origin() const { return origin_; }

  /// Builds a graph from raw parts. Arcs must reference the vertex layout
  /// above and satisfy the one-source-arc / one-sink-arc invariants.
  static FlowGraph assemble(std::vector<Index> variable_ids, std::vector<double> targets,
                            std::vector<Index> group_ids, std::vector<double> group_weights,
                            double lambda, std::vector<Arc> arcs, std::vector<Index> origin = {});

 private:
  void finalize();

  std::vector<Index> variable_ids_;
  std::vector<double> targets_;
  std::vector<Index> group_ids_;
  std::vector<double> group_weights_;
  double lambda_ = 0.0;
  std::vector<Arc> arcs_;
  std::vector<Index> origin_;
  std::vector<Index> sink_arc_;
  std::vector<Index> source_arc_;
  std::vector<std::size_t> incident_offsets_;
  std::vector<Index> incident_;
};

/// Partition of the non-terminal vertices by a minimum (s,t)-cut.
struct Cut {
  std::vector<Index> source_side;  // V⁺
  std::vector<Index> sink_side;    // V⁻
  double value = 0.0;
};

/// Canonical graph of a group structure: p + |𝒢| + 2 vertices, arcs (s,g),
/// (g,j) for j ∈ g, and (j,t), in that deterministic order.
/// Requires u_j >= 0 (callers flip signs) and λ > 0.
FlowGraph build_canonical(const GroupStructure& gs, std::span<const double> u, double lambda);

/// Replaces arcs (g,j), j ∈ h, by one unbounded arc (g,h) for each nesting
/// pair h ⊂ g, applied in declaration order. `graph` must be the canonical
/// graph of `gs`. Without hints (declared or detected) the graph is returned
/// unchanged. Throws std::invalid_argument on an invalid hint.
FlowGraph simplify_nested(const FlowGraph& graph, const GroupStructure& gs,
                          std::size_t detection_cap = 2000);

/// Keeps the variable and group vertices with label in [0, num_parts) and
/// returns one graph per label. Internal arcs survive only when both ends
/// carry the same label. If `arc_maps` is given, (*arc_maps)[k][a] is the id
/// in `graph` of arc a of part k.
std::vector<FlowGraph> split_by_label(const FlowGraph& graph, std::span<const Index> label,
                                      Index num_parts,
                                      std::vector<std::vector<Index>>* arc_maps = nullptr);

/// Labels of the maximal connected components of the graph restricted to
/// internal arcs (s and t ignored). Returns the number of components.
Index component_labels(const FlowGraph& graph, std::vector<Index>& label);

/// Maximal connected components, each re-attached to its own s and t.
std::vector<FlowGraph> connected_components(const FlowGraph& graph);

/// DIMACS max-flow text (`p max N M`, `n`, `a u v cap`) with one-based
/// vertices. Unbounded arcs are written with the total source capacity,
/// which no flow can exceed.
std::string to_dimacs(const FlowGraph& graph, std::span<const double> sink_caps);

}  // namespace structflow
