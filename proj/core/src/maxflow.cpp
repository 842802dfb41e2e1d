#include "structflow/maxflow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace structflow {
namespace {

constexpr double kUnbounded = std::numeric_limits<double>::infinity();

double arc_tolerance(const FlowGraph& graph, const FlowState& state, Index a, double tol) {
  if (graph.arc(a).kind == ArcKind::kInternal) return tol;
  return tol * std::max(1.0, state.capacity[a]);
}

double residual(const FlowState& state, Index r) {
  const Index a = r >> 1;
  return (r & 1) ? state.flow[a] : state.capacity[a] - state.flow[a];
}

// Group vertices ordered so that every internal group→group arc goes forward.
std::vector<Index> topological_groups(const FlowGraph& graph) {
  const Index nv = graph.num_variables();
  const Index ng = graph.num_groups();
  std::vector<Index> indegree(ng, 0);
  for (const Arc& arc : graph.arcs()) {
    if (arc.kind == ArcKind::kInternal && graph.is_group(arc.head)) ++indegree[arc.head - nv];
  }
  std::vector<Index> order;
  order.reserve(ng);
  for (Index k = 0; k < ng; ++k) {
    if (indegree[k] == 0) order.push_back(nv + k);
  }
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const Index v = order[pos];
    for (Index r : graph.incident(v)) {
      if (r & 1) continue;
      const Index w = graph.arc(r >> 1).head;
      if (graph.is_group(w) && --indegree[w - nv] == 0) order.push_back(w);
    }
  }
  if (static_cast<Index>(order.size()) != ng) {
    throw std::logic_error("flow graph has a cycle among group vertices");
  }
  return order;
}

void recompute_excess(const FlowGraph& graph, FlowState& state) {
  state.excess.assign(graph.num_vertices(), 0.0);
  for (std::size_t a = 0; a < graph.num_arcs(); ++a) {
    const Arc& arc = graph.arc(static_cast<Index>(a));
    state.excess[arc.tail] -= state.flow[a];
    state.excess[arc.head] += state.flow[a];
  }
  state.value = state.excess[graph.sink()];
}

class PushRelabel {
 public:
  PushRelabel(const FlowGraph& graph, FlowState& state, const MaxFlowOptions& options,
              MaxFlowStats* stats)
      : graph_(graph), st_(state), opt_(options), stats_(stats),
        n_(graph.num_vertices()), s_(graph.source()), t_(graph.sink()) {}

  void run() {
    prepare();
    double scale = 1.0;
    for (std::size_t a = 0; a < graph_.num_arcs(); ++a) {
      if (graph_.arc(static_cast<Index>(a)).kind != ArcKind::kInternal) {
        scale = std::max(scale, st_.capacity[a]);
      }
    }
    active_tol_ = 1e-2 * opt_.saturation_tol * scale;
    tol_.resize(graph_.num_arcs());
    for (std::size_t a = 0; a < graph_.num_arcs(); ++a) {
      tol_[a] = arc_tolerance(graph_, st_, static_cast<Index>(a), opt_.saturation_tol);
    }

    current_.assign(n_, 0);
    in_active_.assign(n_, 0);
    active_head_.assign(static_cast<std::size_t>(n_) + 1, -1);
    active_next_.assign(n_, -1);
    all_head_.assign(static_cast<std::size_t>(n_) + 1, -1);
    all_next_.assign(n_, -1);
    all_prev_.assign(n_, -1);
    label_count_.assign(static_cast<std::size_t>(n_) + 1, 0);

    // Exact initial labels; with global_relabel off they are never refreshed.
    global_update();
    main_loop();
    st_.value = st_.excess[t_];
  }

 private:
  bool usable(Index r) const { return residual(st_, r) > tol_[r >> 1]; }

  // Valid pre-flow: flows clamped to capacities, source arcs saturated, and
  // every deficit pushed downstream until it reaches the sink.
  void prepare() {
    for (std::size_t a = 0; a < graph_.num_arcs(); ++a) {
      double& f = st_.flow[a];
      if (!(f > 0.0)) f = 0.0;
      if (f > st_.capacity[a]) f = st_.capacity[a];
      if (graph_.arc(static_cast<Index>(a)).kind == ArcKind::kSource) f = st_.capacity[a];
    }
    recompute_excess(graph_, st_);

    auto drain_deficit = [&](Index v) {
      double& e = st_.excess[v];
      if (e >= 0.0) return;
      for (Index r : graph_.incident(v)) {
        if (e >= 0.0) break;
        if (r & 1) continue;
        const Index a = r >> 1;
        const double take = std::min(st_.flow[a], -e);
        if (take <= 0.0) continue;
        st_.flow[a] -= take;
        e += take;
        st_.excess[graph_.arc(a).head] -= take;
      }
      if (e < 0.0) e = 0.0;  // rounding dust
    };
    for (Index v : topological_groups(graph_)) drain_deficit(v);
    for (Index v = 0; v < graph_.num_variables(); ++v) drain_deficit(v);
  }

  void all_insert(Index v) {
    const Index d = st_.height[v];
    all_prev_[v] = -1;
    all_next_[v] = all_head_[d];
    if (all_head_[d] != -1) all_prev_[all_head_[d]] = v;
    all_head_[d] = v;
    ++label_count_[d];
    max_label_ = std::max(max_label_, d);
  }

  void all_remove(Index v) {
    const Index d = st_.height[v];
    if (all_prev_[v] != -1) {
      all_next_[all_prev_[v]] = all_next_[v];
    } else {
      all_head_[d] = all_next_[v];
    }
    if (all_next_[v] != -1) all_prev_[all_next_[v]] = all_prev_[v];
    --label_count_[d];
  }

  void activate(Index v) {
    if (in_active_[v] || v == s_ || v == t_) return;
    const Index d = st_.height[v];
    if (d >= n_ || st_.excess[v] <= active_tol_) return;
    in_active_[v] = 1;
    active_next_[v] = active_head_[d];
    active_head_[d] = v;
    max_active_ = std::max(max_active_, d);
  }

  void global_update() {
    if (stats_) ++stats_->global_relabels;
    st_.height.assign(n_, n_);
    st_.height[t_] = 0;
    queue_.clear();
    queue_.push_back(t_);
    for (std::size_t pos = 0; pos < queue_.size(); ++pos) {
      const Index w = queue_[pos];
      for (Index r : graph_.incident(w)) {
        const Index x = graph_.residual_head(r);
        if (x == s_ || st_.height[x] != n_) continue;
        if (!usable(r ^ 1)) continue;
        st_.height[x] = st_.height[w] + 1;
        queue_.push_back(x);
      }
    }
    std::fill(active_head_.begin(), active_head_.end(), -1);
    std::fill(all_head_.begin(), all_head_.end(), -1);
    std::fill(label_count_.begin(), label_count_.end(), 0);
    std::fill(in_active_.begin(), in_active_.end(), 0);
    std::fill(current_.begin(), current_.end(), 0);
    max_active_ = -1;
    max_label_ = 0;
    for (Index v = 0; v < n_; ++v) {
      if (v == s_ || v == t_ || st_.height[v] >= n_) continue;
      all_insert(v);
      activate(v);
    }
    relabels_since_update_ = 0;
  }

  void gap(Index empty_label) {
    for (Index d = empty_label + 1; d <= max_label_; ++d) {
      for (Index v = all_head_[d]; v != -1;) {
        const Index next = all_next_[v];
        st_.height[v] = n_;
        if (stats_) ++stats_->gap_relabels;
        v = next;
      }
      all_head_[d] = -1;
      label_count_[d] = 0;
    }
    max_label_ = empty_label;
  }

  void relabel(Index v) {
    if (stats_) ++stats_->relabels;
    ++relabels_since_update_;
    const Index old = st_.height[v];
    all_remove(v);
    Index best = 2 * n_;
    const auto adj = graph_.incident(v);
    std::size_t best_pos = 0;
    for (std::size_t k = 0; k < adj.size(); ++k) {
      const Index r = adj[k];
      if (!usable(r)) continue;
      const Index h = st_.height[graph_.residual_head(r)];
      if (h < best) {
        best = h;
        best_pos = k;
      }
    }
    if (opt_.gap_heuristic && label_count_[old] == 0) {
      gap(old);
      st_.height[v] = n_;
      return;
    }
    st_.height[v] = std::min(best + 1, n_);
    current_[v] = best_pos;
    if (st_.height[v] < n_) all_insert(v);
  }

  void push(Index v, Index r) {
    const Index a = r >> 1;
    const Index w = graph_.residual_head(r);
    const double room = residual(st_, r);
    double delta = st_.excess[v];
    if (delta >= room) {
      delta = room;
      st_.flow[a] = (r & 1) ? 0.0 : st_.capacity[a];
    } else {
      st_.flow[a] += (r & 1) ? -delta : delta;
    }
    st_.excess[v] -= delta;
    st_.excess[w] += delta;
    if (stats_) ++stats_->pushes;
    activate(w);
  }

  void discharge(Index v) {
    const auto adj = graph_.incident(v);
    while (st_.excess[v] > active_tol_) {
      std::size_t& cur = current_[v];
      for (; cur < adj.size(); ++cur) {
        const Index r = adj[cur];
        if (st_.height[graph_.residual_head(r)] + 1 != st_.height[v] || !usable(r)) continue;
        push(v, r);
        if (st_.excess[v] <= active_tol_) break;
      }
      if (st_.excess[v] <= active_tol_) break;
      relabel(v);
      if (st_.height[v] >= n_) break;
    }
  }

  void main_loop() {
    while (true) {
      while (max_active_ >= 0 && active_head_[max_active_] == -1) --max_active_;
      if (max_active_ < 0) break;
      const Index v = active_head_[max_active_];
      active_head_[max_active_] = active_next_[v];
      in_active_[v] = 0;
      if (st_.height[v] != max_active_ || st_.excess[v] <= active_tol_) continue;
      discharge(v);
      if (opt_.global_relabel && relabels_since_update_ >= n_) global_update();
    }
  }

  const FlowGraph& graph_;
  FlowState& st_;
  const MaxFlowOptions& opt_;
  MaxFlowStats* stats_;
  const Index n_;
  const Index s_;
  const Index t_;
  double active_tol_ = 0.0;
  std::vector<double> tol_;
  std::vector<std::size_t> current_;
  std::vector<char> in_active_;
  std::vector<Index> active_head_;
  std::vector<Index> active_next_;
  std::vector<Index> all_head_;
  std::vector<Index> all_next_;
  std::vector<Index> all_prev_;
  std::vector<Index> label_count_;
  std::vector<Index> queue_;
  Index max_active_ = -1;
  Index max_label_ = 0;
  Index relabels_since_update_ = 0;
};

}  // namespace

FlowState make_flow_state(const FlowGraph& graph, std::span<const double> sink_caps) {
  if (sink_caps.size() != static_cast<std::size_t>(graph.num_variables())) {
    throw std::invalid_argument("sink capacity vector has the wrong length");
  }
  FlowState state;
  state.capacity.resize(graph.num_arcs());
  for (std::size_t a = 0; a < graph.num_arcs(); ++a) {
    const Arc& arc = graph.arc(static_cast<Index>(a));
    switch (arc.kind) {
      case ArcKind::kSource: state.capacity[a] = arc.capacity; break;
      case ArcKind::kInternal: state.capacity[a] = kUnbounded; break;
      case ArcKind::kSink: state.capacity[a] = sink_caps[arc.tail]; break;
    }
  }
  state.flow.assign(graph.num_arcs(), 0.0);
  state.excess.assign(graph.num_vertices(), 0.0);
  state.height.assign(graph.num_vertices(), 0);
  return state;
}

void solve_preflow(const FlowGraph& graph, FlowState& state, const MaxFlowOptions& options,
                   MaxFlowStats* stats) {
  PushRelabel engine(graph, state, options, stats);
  engine.run();
  if (options.complete) return_excess(graph, state);
}

void return_excess(const FlowGraph& graph, FlowState& state) {
  auto give_back = [&](Index v) {
    double& e = state.excess[v];
    if (e <= 0.0) return;
    for (Index r : graph.incident(v)) {
      if (e <= 0.0) break;
      if (!(r & 1)) continue;  // only arcs entering v
      const Index a = r >> 1;
      const double back = std::min(state.flow[a], e);
      if (back <= 0.0) continue;
      state.flow[a] -= back;
      e -= back;
      state.excess[graph.arc(a).tail] += back;
    }
    e = 0.0;
  };
  for (Index v = 0; v < graph.num_variables(); ++v) give_back(v);
  const std::vector<Index> order = topological_groups(graph);
  for (auto it = order.rbegin(); it != order.rend(); ++it) give_back(*it);
  state.excess[graph.source()] = 0.0;
  state.value = state.excess[graph.sink()];
}

FlowState max_flow(const FlowGraph& graph, std::span<const double> sink_caps,
                   const MaxFlowOptions& options, MaxFlowStats* stats) {
  FlowState state = make_flow_state(graph, sink_caps);
  solve_preflow(graph, state, options, stats);
  return state;
}

FlowState warm_restart(const FlowGraph& graph, FlowState prev,
                       std::span<const double> new_sink_caps, const MaxFlowOptions& options,
                       MaxFlowStats* stats) {
  if (new_sink_caps.size() != static_cast<std::size_t>(graph.num_variables()) ||
      prev.flow.size() != graph.num_arcs() || prev.capacity.size() != graph.num_arcs()) {
    throw std::invalid_argument("warm_restart: state or capacity vector does not match graph");
  }
  bool unchanged = true;
  for (Index j = 0; j < graph.num_variables(); ++j) {
    const Index a = graph.sink_arcs()[j];
    if (prev.capacity[a] != new_sink_caps[j]) {
      unchanged = false;
      prev.capacity[a] = new_sink_caps[j];
    }
  }
  if (unchanged) return prev;
  solve_preflow(graph, prev, options, stats);
  return prev;
}

std::vector<char> reaches_sink(const FlowGraph& graph, const FlowState& state, double tol) {
  std::vector<char> mark(graph.num_vertices(), 0);
  std::vector<Index> queue{graph.sink()};
  mark[graph.sink()] = 1;
  for (std::size_t pos = 0; pos < queue.size(); ++pos) {
    const Index w = queue[pos];
    for (Index r : graph.incident(w)) {
      const Index x = graph.residual_head(r);
      if (mark[x]) continue;
      const Index back = r ^ 1;
      if (residual(state, back) <= arc_tolerance(graph, state, back >> 1, tol)) continue;
      mark[x] = 1;
      queue.push_back(x);
    }
  }
  return mark;
}

Cut min_cut(const FlowGraph& graph, const FlowState& state, double tol) {
  std::vector<char> mark(graph.num_vertices(), 0);
  std::vector<Index> queue{graph.source()};
  mark[graph.source()] = 1;
  for (std::size_t pos = 0; pos < queue.size(); ++pos) {
    const Index v = queue[pos];
    for (Index r : graph.incident(v)) {
      const Index w = graph.residual_head(r);
      if (mark[w]) continue;
      if (residual(state, r) <= arc_tolerance(graph, state, r >> 1, tol)) continue;
      mark[w] = 1;
      queue.push_back(w);
    }
  }
  if (mark[graph.sink()]) throw std::logic_error("min_cut: the flow is not maximal");
  Cut cut;
  for (Index v = 0; v < graph.source(); ++v) {
    (mark[v] ? cut.source_side : cut.sink_side).push_back(v);
  }
  for (std::size_t a = 0; a < graph.num_arcs(); ++a) {
    const Arc& arc = graph.arc(static_cast<Index>(a));
    if (mark[arc.tail] && !mark[arc.head]) cut.value += state.capacity[a];
  }
  return cut;
}

}  // namespace structflow
