#include "structflow/flowgraph.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace structflow {

FlowGraph FlowGraph::assemble(std::vector<Index> variable_ids, std::vector<double> targets,
                              std::vector<Index> group_ids, std::vector<double> group_weights,
                              double lambda, std::vector<Arc> arcs, std::vector<Index> origin) {
  FlowGraph g;
  g.variable_ids_ = std::move(variable_ids);
  g.targets_ = std::move(targets);
  g.group_ids_ = std::move(group_ids);
  g.group_weights_ = std::move(group_weights);
  g.lambda_ = lambda;
  g.arcs_ = std::move(arcs);
  if (origin.empty()) {
    origin.resize(g.arcs_.size());
    std::iota(origin.begin(), origin.end(), Index{0});
  }
  g.origin_ = std::move(origin);
  g.finalize();
  return g;
}

void FlowGraph::finalize() {
  const Index n = num_vertices();
  sink_arc_.assign(num_variables(), -1);
  source_arc_.assign(num_groups(), -1);
  incident_offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (std::size_t a = 0; a < arcs_.size(); ++a) {
    const Arc& arc = arcs_[a];
    ++incident_offsets_[arc.tail + 1];
    ++incident_offsets_[arc.head + 1];
    if (arc.kind == ArcKind::kSink) {
      if (sink_arc_[arc.tail] != -1) throw std::logic_error("variable with two sink arcs");
      sink_arc_[arc.tail] = static_cast<Index>(a);
    } else if (arc.kind == ArcKind::kSource) {
      const Index k = arc.head - num_variables();
      if (source_arc_[k] != -1) throw std::logic_error("group with two source arcs");
      source_arc_[k] = static_cast<Index>(a);
    }
  }
  std::partial_sum(incident_offsets_.begin(), incident_offsets_.end(), incident_offsets_.begin());
  incident_.assign(incident_offsets_.back(), 0);
  std::vector<std::size_t> cursor(incident_offsets_.begin(), incident_offsets_.end() - 1);
  for (std::size_t a = 0; a < arcs_.size(); ++a) {
    incident_[cursor[arcs_[a].tail]++] = static_cast<Index>(2 * a);
    incident_[cursor[arcs_[a].head]++] = static_cast<Index>(2 * a + 1);
  }
  if (std::find(sink_arc_.begin(), sink_arc_.end(), -1) != sink_arc_.end() ||
      std::find(source_arc_.begin(), source_arc_.end(), -1) != source_arc_.end()) {
    throw std::logic_error("flow graph is missing a source or sink arc");
  }
}

FlowGraph build_canonical(const GroupStructure& gs, std::span<const double> u, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("build_canonical: lambda must be positive");
  if (u.size() != gs.dimension()) {
    throw std::invalid_argument("build_canonical: u has the wrong dimension");
  }
  const auto p = static_cast<Index>(gs.dimension());
  const auto ng = static_cast<Index>(gs.size());
  std::vector<Index> variable_ids(p);
  std::iota(variable_ids.begin(), variable_ids.end(), Index{0});
  std::vector<Index> group_ids(ng);
  std::iota(group_ids.begin(), group_ids.end(), Index{0});
  std::vector<double> weights(gs.weights().begin(), gs.weights().end());

  const Index s = p + ng;
  const Index t = s + 1;
  std::vector<Arc> arcs;
  arcs.reserve(static_cast<std::size_t>(ng) + gs.total_members() + static_cast<std::size_t>(p));
  for (Index k = 0; k < ng; ++k) arcs.push_back({s, p + k, ArcKind::kSource, lambda * weights[k]});
  for (Index k = 0; k < ng; ++k) {
    for (Index j : gs.group(k)) arcs.push_back({p + k, j, ArcKind::kInternal, 0.0});
  }
  for (Index j = 0; j < p; ++j) arcs.push_back({j, t, ArcKind::kSink, 0.0});
  return FlowGraph::assemble(std::move(variable_ids), std::vector<double>(u.begin(), u.end()),
                             std::move(group_ids), std::move(weights), lambda, std::move(arcs));
}

FlowGraph simplify_nested(const FlowGraph& graph, const GroupStructure& gs,
                          std::size_t detection_cap) {
  const Index p = graph.num_variables();
  const Index ng = graph.num_groups();
  if (static_cast<std::size_t>(p) != gs.dimension() || static_cast<std::size_t>(ng) != gs.size()) {
    throw std::invalid_argument("simplify_nested: graph is not the canonical graph of gs");
  }
  const std::vector<NestingHint> hints = gs.nesting(detection_cap);
  if (hints.empty()) return graph;

  std::vector<std::vector<char>> direct(ng);
  for (Index k = 0; k < ng; ++k) direct[k].assign(gs.group_size(k), 1);
  std::vector<std::vector<Index>> children(ng);

  std::vector<char> seen(ng, 0);
  std::vector<Index> stack;
  auto reachable_group = [&](Index from, Index target) {
    std::fill(seen.begin(), seen.end(), 0);
    stack.assign(children[from].begin(), children[from].end());
    while (!stack.empty()) {
      const Index g = stack.back();
      stack.pop_back();
      if (g == target) return true;
      if (seen[g]) continue;
      seen[g] = 1;
      stack.insert(stack.end(), children[g].begin(), children[g].end());
    }
    return false;
  };

  for (const NestingHint& hint : hints) {
    const Index g = hint.parent;
    const Index h = hint.child;
    if (g < 0 || g >= ng || h < 0 || h >= ng || gs.group_size(h) >= gs.group_size(g) ||
        !is_subset(gs.group(h), gs.group(g))) {
      throw std::invalid_argument("simplify_nested: hint " + std::to_string(h + 1) + " ⊂ " +
                                  std::to_string(g + 1) + " does not hold");
    }
    const auto outer = gs.group(g);
    const auto inner = gs.group(h);
    std::size_t pos = 0;
    for (Index j : inner) {
      while (outer[pos] < j) ++pos;
      direct[g][pos] = 0;
    }
    if (!reachable_group(g, h)) children[g].push_back(h);
  }

  const Index s = p + ng;
  const Index t = s + 1;
  std::vector<Arc> arcs;
  for (Index k = 0; k < ng; ++k) arcs.push_back({s, p + k, ArcKind::kSource, graph.lambda() * gs.weight(k)});
  for (Index k = 0; k < ng; ++k) {
    const auto members = gs.group(k);
    for (std::size_t m = 0; m < members.size(); ++m) {
      if (direct[k][m]) arcs.push_back({p + k, members[m], ArcKind::kInternal, 0.0});
    }
    for (Index c : children[k]) arcs.push_back({p + k, p + c, ArcKind::kInternal, 0.0});
  }
  for (Index j = 0; j < p; ++j) arcs.push_back({j, t, ArcKind::kSink, 0.0});

  const auto vids = graph.variable_ids();
  const auto gids = graph.group_ids();
  const auto w = graph.group_weights();
  const auto u = graph.targets();
  return FlowGraph::assemble({vids.begin(), vids.end()}, {u.begin(), u.end()},
                             {gids.begin(), gids.end()}, {w.begin(), w.end()}, graph.lambda(),
                             std::move(arcs));
}

std::vector<FlowGraph> split_by_label(const FlowGraph& graph, std::span<const Index> label,
                                      Index num_parts,
                                      std::vector<std::vector<Index>>* arc_maps) {
  const Index nv = graph.num_variables();
  const Index ng = graph.num_groups();
  struct Part {
    std::vector<Index> vids;
    std::vector<double> targets;
    std::vector<Index> gids;
    std::vector<double> weights;
    std::vector<Arc> arcs;
    std::vector<Index> origin;
    std::vector<Index> parent_arc;
  };
  std::vector<Part> parts(num_parts);
  // New vertex number of each kept vertex inside its part. Groups are
  // renumbered after all variables of the part are known, so store the
  // within-kind rank first.
  std::vector<Index> rank(graph.num_vertices(), -1);
  for (Index v = 0; v < nv; ++v) {
    const Index k = label[v];
    if (k < 0) continue;
    rank[v] = static_cast<Index>(parts[k].vids.size());
    parts[k].vids.push_back(graph.variable_ids()[v]);
    parts[k].targets.push_back(graph.targets()[v]);
  }
  for (Index q = 0; q < ng; ++q) {
    const Index v = nv + q;
    const Index k = label[v];
    if (k < 0) continue;
    rank[v] = static_cast<Index>(parts[k].gids.size());
    parts[k].gids.push_back(graph.group_ids()[q]);
    parts[k].weights.push_back(graph.group_weights()[q]);
  }
  auto renumber = [&](Index v, const Part& part) {
    return graph.is_variable(v) ? rank[v] : static_cast<Index>(part.vids.size()) + rank[v];
  };

  for (std::size_t a = 0; a < graph.num_arcs(); ++a) {
    const Arc& arc = graph.arc(static_cast<Index>(a));
    Index k = -1;
    Arc copy = arc;
    switch (arc.kind) {
      case ArcKind::kSource: {
        k = label[arc.head];
        if (k < 0) continue;
        const Part& part = parts[k];
        copy.tail = static_cast<Index>(part.vids.size() + part.gids.size());
        copy.head = renumber(arc.head, part);
        break;
      }
      case ArcKind::kSink: {
        k = label[arc.tail];
        if (k < 0) continue;
        const Part& part = parts[k];
        copy.tail = renumber(arc.tail, part);
        copy.head = static_cast<Index>(part.vids.size() + part.gids.size() + 1);
        break;
      }
      case ArcKind::kInternal: {
        k = label[arc.tail];
        if (k < 0 || label[arc.head] != k) continue;
        const Part& part = parts[k];
        copy.tail = renumber(arc.tail, part);
        copy.head = renumber(arc.head, part);
        break;
      }
    }
    Part& part = parts[k];
    part.arcs.push_back(copy);
    part.origin.push_back(graph.origin()[a]);
    part.parent_arc.push_back(static_cast<Index>(a));
  }

  std::vector<FlowGraph> out;
  out.reserve(num_parts);
  if (arc_maps) arc_maps->assign(num_parts, {});
  for (Index k = 0; k < num_parts; ++k) {
    Part& part = parts[k];
    if (arc_maps) (*arc_maps)[k] = std::move(part.parent_arc);
    out.push_back(FlowGraph::assemble(std::move(part.vids), std::move(part.targets),
                                      std::move(part.gids), std::move(part.weights),
                                      graph.lambda(), std::move(part.arcs),
                                      std::move(part.origin)));
  }
  return out;
}

Index component_labels(const FlowGraph& graph, std::vector<Index>& label) {
  const Index n = graph.num_vertices();
  label.assign(n, -1);
  Index count = 0;
  std::vector<Index> stack;
  for (Index start = 0; start < graph.source(); ++start) {
    if (label[start] != -1) continue;
    label[start] = count;
    stack.push_back(start);
    while (!stack.empty()) {
      const Index v = stack.back();
      stack.pop_back();
      for (Index r : graph.incident(v)) {
        if (graph.arc(r >> 1).kind != ArcKind::kInternal) continue;
        const Index w = graph.residual_head(r);
        if (label[w] == -1) {
          label[w] = count;
          stack.push_back(w);
        }
      }
    }
    ++count;
  }
  return count;
}

std::vector<FlowGraph> connected_components(const FlowGraph& graph) {
  std::vector<Index> label;
  const Index count = component_labels(graph, label);
  return split_by_label(graph, label, count);
}

std::string to_dimacs(const FlowGraph& graph, std::span<const double> sink_caps) {
  if (sink_caps.size() != static_cast<std::size_t>(graph.num_variables())) {
    throw std::invalid_argument("to_dimacs: one sink capacity per variable vertex expected");
  }
  double unbounded = 1.0;
  for (const Arc& arc : graph.arcs()) {
    if (arc.kind == ArcKind::kSource) unbounded += arc.capacity;
  }
  std::ostringstream os;
  os.precision(17);
  os << "c structflow flow graph\n";
  os << "p max " << graph.num_vertices() << ' ' << graph.num_arcs() << '\n';
  os << "n " << graph.source() + 1 << " s\n";
  os << "n " << graph.sink() + 1 << " t\n";
  for (const Arc& arc : graph.arcs()) {
    double cap = arc.capacity;
    if (arc.kind == ArcKind::kInternal) cap = unbounded;
    if (arc.kind == ArcKind::kSink) cap = sink_caps[arc.tail];
    os << "a " << arc.tail + 1 << ' ' << arc.head + 1 << ' ' << cap << '\n';
  }
  return os.str();
}

}  // namespace structflow
