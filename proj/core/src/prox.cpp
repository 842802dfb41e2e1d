#include "structflow/prox.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>

#include "structflow/projection.hpp"

namespace structflow {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("STRUCTFLOW_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return 1;
}

struct Piece {
  FlowGraph graph;
  std::vector<double> flow;  // warm start per arc; empty for a cold start
};

bool has_group_arcs(const FlowGraph& g) {
  for (const Arc& arc : g.arcs()) {
    if (arc.kind == ArcKind::kInternal && g.is_group(arc.head)) return true;
  }
  return false;
}

// ub_j = Σ λη_g over the group vertices that reach j inside the piece.
std::vector<double> box_bounds(const FlowGraph& g) {
  const Index nv = g.num_variables();
  const Index ng = g.num_groups();
  std::vector<double> ub(nv, 0.0);
  if (!has_group_arcs(g)) {
    for (const Arc& arc : g.arcs()) {
      if (arc.kind != ArcKind::kInternal) continue;
      ub[arc.head] += g.arc(g.source_arcs()[arc.tail - nv]).capacity;
    }
    return ub;
  }
  std::vector<Index> stamp(g.num_vertices(), -1);
  std::vector<Index> stack;
  for (Index k = 0; k < ng; ++k) {
    const double cap = g.arc(g.source_arcs()[k]).capacity;
    const Index root = nv + k;
    stack.assign(1, root);
    stamp[root] = k;
    while (!stack.empty()) {
      const Index v = stack.back();
      stack.pop_back();
      for (Index r : g.incident(v)) {
        if (r & 1) continue;
        const Arc& arc = g.arc(r >> 1);
        if (arc.kind != ArcKind::kInternal || stamp[arc.head] == k) continue;
        stamp[arc.head] = k;
        if (g.is_variable(arc.head)) {
          ub[arc.head] += cap;
        } else {
          stack.push_back(arc.head);
        }
      }
    }
  }
  return ub;
}

class FlowSolver {
 public:
  FlowSolver(const ProxOptions& options, std::vector<double>& xi_by_id,
             std::vector<double>* arc_flow, std::vector<SplitRecord>* splits,
             std::size_t split_limit)
      : opt_(options), xi_(xi_by_id), arc_flow_(arc_flow), records_(splits),
        split_limit_(split_limit) {
    preflow_opt_ = options.maxflow;
    preflow_opt_.complete = false;
  }

  void run(Piece root) {
    stack_.push_back(std::move(root));
    while (!stack_.empty()) {
      Piece piece = std::move(stack_.back());
      stack_.pop_back();
      process(piece);
    }
  }

  // Pushes the piece, split into connected components when enabled.
  void push(Piece piece) {
    if (opt_.use_components && piece.graph.num_groups() > 1) {
      std::vector<Index> label;
      const Index parts = component_labels(piece.graph, label);
      if (parts > 1) {
        std::vector<std::vector<Index>> maps;
        auto graphs = split_by_label(piece.graph, label, parts, &maps);
        for (Index k = 0; k < parts; ++k) {
          stack_.push_back({std::move(graphs[k]), carry(piece.flow, maps[k])});
        }
        return;
      }
    }
    stack_.push_back(std::move(piece));
  }

  const ProxStats& stats() const { return stats_; }

 private:
  static std::vector<double> carry(const std::vector<double>& flow, const std::vector<Index>& map) {
    if (flow.empty()) return {};
    std::vector<double> out(map.size());
    for (std::size_t a = 0; a < map.size(); ++a) out[a] = flow[map[a]];
    return out;
  }

  void process(Piece& piece) {
    const FlowGraph& g = piece.graph;
    const Index nv = g.num_variables();
    const Index ng = g.num_groups();
    if (ng == 0) {
      for (Index j = 0; j < nv; ++j) xi_[g.variable_ids()[j]] = 0.0;
      return;
    }
    const auto u = g.targets();
    double budget = 0.0;
    for (Index k = 0; k < ng; ++k) budget += g.arc(g.source_arcs()[k]).capacity;

    std::vector<double> gamma(nv);
    if (opt_.improved_projection) {
      const std::vector<double> ub = box_bounds(g);
      project_l1_ball_box(u, budget, ub, gamma, scratch_);
      if (ng == 1) {
        // One group: the bounded projection is the exact solution.
        finish_single_group(g, gamma);
        return;
      }
    } else {
      project_l1_ball(u, budget, gamma, scratch_);
    }

    FlowState state = make_flow_state(g, gamma);
    if (!piece.flow.empty()) state.flow = std::move(piece.flow);
    solve_preflow(g, state, preflow_opt_, &stats_.maxflow);
    ++stats_.max_flow_calls;

    double worst = 0.0;
    for (Index j = 0; j < nv; ++j) {
      const double deficit = gamma[j] - state.flow[g.sink_arcs()[j]];
      worst = std::max(worst, deficit / (1.0 + gamma[j]));
    }
    if (worst <= opt_.termination_tol) {
      finish_leaf(g, state);
      return;
    }

    // Min cut: V⁻ is everything that can still reach t.
    const std::vector<char> mark = reaches_sink(g, state, opt_.maxflow.saturation_tol);
    std::vector<Index> label(g.source(), 0);
    std::size_t sink_side = 0;
    for (Index v = 0; v < g.source(); ++v) {
      label[v] = mark[v] ? 1 : 0;
      sink_side += mark[v] ? 1 : 0;
    }
    if (sink_side == 0 || sink_side == static_cast<std::size_t>(g.source())) {
      // Only reachable through rounding: the flow already meets γ up to
      // dust that the tolerances could not classify.
      ++stats_.degenerate_cuts;
      if (worst > 1e-6) {
        throw std::runtime_error("compute_flow: empty side in a min cut (deficit " +
                                 std::to_string(worst) + "); saturation tolerance too loose");
      }
      finish_leaf(g, state);
      return;
    }
    if (++stats_.splits > split_limit_) {
      throw std::runtime_error("compute_flow: split count exceeds the number of variables");
    }
    if (records_) record(g, label);

    std::vector<std::vector<Index>> maps;
    auto graphs = split_by_label(g, label, 2, &maps);
    for (Index k = 0; k < 2; ++k) push({std::move(graphs[k]), carry(state.flow, maps[k])});
  }

  void finish_single_group(const FlowGraph& g, const std::vector<double>& gamma) {
    for (Index j = 0; j < g.num_variables(); ++j) xi_[g.variable_ids()[j]] = gamma[j];
    if (!arc_flow_) return;
    double total = 0.0;
    for (std::size_t a = 0; a < g.num_arcs(); ++a) {
      const Arc& arc = g.arc(static_cast<Index>(a));
      if (arc.kind == ArcKind::kSource) continue;
      const Index j = arc.kind == ArcKind::kSink ? arc.tail : arc.head;
      (*arc_flow_)[g.origin()[a]] = gamma[j];
      if (arc.kind == ArcKind::kSink) total += gamma[j];
    }
    (*arc_flow_)[g.origin()[g.source_arcs()[0]]] = total;
  }

  void finish_leaf(const FlowGraph& g, FlowState& state) {
    for (Index j = 0; j < g.num_variables(); ++j) {
      xi_[g.variable_ids()[j]] = state.flow[g.sink_arcs()[j]];
    }
    if (!arc_flow_) return;
    return_excess(g, state);
    for (std::size_t a = 0; a < g.num_arcs(); ++a) (*arc_flow_)[g.origin()[a]] = state.flow[a];
  }

  void record(const FlowGraph& g, const std::vector<Index>& label) {
    SplitRecord rec;
    for (Index v = 0; v < g.source(); ++v) {
      const bool sink = label[v] == 1;
      if (g.is_variable(v)) {
        (sink ? rec.sink_variables : rec.source_variables).push_back(g.variable_ids()[v]);
      } else {
        const Index id = g.group_ids()[v - g.num_variables()];
        (sink ? rec.sink_groups : rec.source_groups).push_back(id);
      }
    }
    records_->push_back(std::move(rec));
  }

  const ProxOptions& opt_;
  MaxFlowOptions preflow_opt_;
  std::vector<double>& xi_;
  std::vector<double>* arc_flow_;
  std::vector<SplitRecord>* records_;
  std::size_t split_limit_;
  std::vector<Piece> stack_;
  std::vector<double> scratch_;
  ProxStats stats_;
};

// ξ^g from the arc flows of a graph whose group vertices may feed each
// other: the flow through a vertex is split over its out-arcs in proportion
// to the arc flows, so each group keeps its share along every path.
std::vector<std::vector<double>> decompose_group_flows(const FlowGraph& root,
                                                       const std::vector<double>& flow,
                                                       const GroupStructure& gs) {
  std::vector<std::vector<double>> out(gs.size());
  for (std::size_t g = 0; g < gs.size(); ++g) out[g].assign(gs.group_size(g), 0.0);
  auto deposit = [&](Index gid, Index coord, double value) {
    const auto members = gs.group(gid);
    const auto it = std::lower_bound(members.begin(), members.end(), coord);
    if (it == members.end() || *it != coord) {
      throw std::logic_error("group flow reaches a coordinate outside the group");
    }
    out[gid][it - members.begin()] += value;
  };

  const Index nv = root.num_variables();
  const Index ng = root.num_groups();
  if (!has_group_arcs(root)) {
    for (std::size_t a = 0; a < root.num_arcs(); ++a) {
      const Arc& arc = root.arc(static_cast<Index>(a));
      if (arc.kind != ArcKind::kInternal || flow[a] == 0.0) continue;
      deposit(root.group_ids()[arc.tail - nv], root.variable_ids()[arc.head], flow[a]);
    }
    return out;
  }

  std::vector<double> through(root.num_vertices(), 0.0);
  for (std::size_t a = 0; a < root.num_arcs(); ++a) {
    const Arc& arc = root.arc(static_cast<Index>(a));
    if (arc.kind != ArcKind::kSink) through[arc.head] += flow[a];
  }
  // Topological positions of group vertices (Kahn).
  std::vector<Index> indeg(ng, 0);
  for (const Arc& arc : root.arcs()) {
    if (arc.kind == ArcKind::kInternal && root.is_group(arc.head)) ++indeg[arc.head - nv];
  }
  std::vector<Index> order;
  for (Index k = 0; k < ng; ++k) {
    if (indeg[k] == 0) order.push_back(nv + k);
  }
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    for (Index r : root.incident(order[pos])) {
      if (r & 1) continue;
      const Index h = root.arc(r >> 1).head;
      if (root.is_group(h) && --indeg[h - nv] == 0) order.push_back(h);
    }
  }
  std::vector<Index> topo(root.num_vertices(), 0);
  for (std::size_t pos = 0; pos < order.size(); ++pos) topo[order[pos]] = static_cast<Index>(pos);

  std::vector<double> amount(root.num_vertices(), 0.0);
  std::vector<Index> stamp(root.num_vertices(), -1);
  std::vector<Index> reach;
  for (Index k = 0; k < ng; ++k) {
    const Index start = nv + k;
    const double own = flow[root.source_arcs()[k]];
    if (own <= 0.0) continue;
    reach.assign(1, start);
    stamp[start] = k;
    for (std::size_t pos = 0; pos < reach.size(); ++pos) {
      for (Index r : root.incident(reach[pos])) {
        if (r & 1) continue;
        const Index h = root.arc(r >> 1).head;
        if (root.is_group(h) && stamp[h] != k) {
          stamp[h] = k;
          reach.push_back(h);
        }
      }
    }
    std::sort(reach.begin(), reach.end(), [&](Index a, Index b) { return topo[a] < topo[b]; });
    for (Index v : reach) amount[v] = 0.0;
    amount[start] = own;
    const Index gid = root.group_ids()[k];
    for (Index v : reach) {
      if (amount[v] <= 0.0 || through[v] <= 0.0) continue;
      const double scale = amount[v] / through[v];
      for (Index r : root.incident(v)) {
        if (r & 1) continue;
        const Index a = r >> 1;
        if (flow[a] <= 0.0) continue;
        const Index h = root.arc(a).head;
        if (root.is_group(h)) {
          amount[h] += scale * flow[a];
        } else {
          deposit(gid, root.variable_ids()[h], scale * flow[a]);
        }
      }
    }
  }
  return out;
}

void check_finite(std::span<const double> u, double lambda, const char* who) {
  if (!std::isfinite(lambda) || lambda < 0.0) {
    throw std::invalid_argument(std::string(who) + ": lambda must be finite and non-negative");
  }
  for (double x : u) {
    if (!std::isfinite(x)) throw std::invalid_argument(std::string(who) + ": non-finite input");
  }
}

}  // namespace

FlowResult compute_flow(const FlowGraph& graph, const ProxOptions& options, bool record_splits) {
  FlowResult result;
  Index max_id = -1;
  for (Index id : graph.variable_ids()) max_id = std::max(max_id, id);
  std::vector<double> xi_by_id(static_cast<std::size_t>(max_id + 1), 0.0);
  const bool keep = options.keep_group_flows || options.certify;
  if (keep) {
    Index max_origin = -1;
    for (Index a : graph.origin()) max_origin = std::max(max_origin, a);
    result.arc_flow.assign(static_cast<std::size_t>(max_origin + 1), 0.0);
  }
  std::vector<double>* arc_flow = keep ? &result.arc_flow : nullptr;
  const std::size_t limit = static_cast<std::size_t>(graph.num_variables()) + 1;

  // Top-level components, distributed over workers.
  std::vector<Piece> roots;
  if (options.use_components) {
    std::vector<Index> label;
    const Index parts = component_labels(graph, label);
    for (FlowGraph& g : split_by_label(graph, label, parts)) roots.push_back({std::move(g), {}});
  } else {
    roots.push_back({graph, {}});
  }
  result.stats.components = roots.size();

  const unsigned threads =
      record_splits ? 1u : std::min<unsigned>(resolve_threads(options.threads),
                                              static_cast<unsigned>(std::max<std::size_t>(roots.size(), 1)));
  if (threads <= 1) {
    FlowSolver solver(options, xi_by_id, arc_flow, record_splits ? &result.splits : nullptr, limit);
    for (Piece& piece : roots) solver.run(std::move(piece));
    result.stats += solver.stats();
  } else {
    // Largest components first so that workers stay balanced.
    std::vector<std::size_t> order(roots.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return roots[a].graph.num_arcs() > roots[b].graph.num_arcs();
    });
    std::atomic<std::size_t> next{0};
    std::mutex merge;
    std::exception_ptr failure;
    auto worker = [&] {
      try {
        FlowSolver solver(options, xi_by_id, arc_flow, nullptr, limit);
        for (std::size_t i; (i = next.fetch_add(1)) < order.size();) {
          solver.run(std::move(roots[order[i]]));
        }
        std::lock_guard<std::mutex> lock(merge);
        result.stats += solver.stats();
      } catch (...) {
        std::lock_guard<std::mutex> lock(merge);
        if (!failure) failure = std::current_exception();
      }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }
  result.stats.components = roots.size();

  result.xi_bar.resize(graph.num_variables());
  for (Index j = 0; j < graph.num_variables(); ++j) {
    result.xi_bar[j] = xi_by_id[graph.variable_ids()[j]];
  }
  return result;
}

ProxResult prox_overlapping_linf(std::span<const double> u, const GroupStructure& gs,
                                 double lambda, const ProxOptions& options) {
  if (u.size() != gs.dimension()) {
    throw std::invalid_argument("prox_overlapping_linf: u has " + std::to_string(u.size()) +
                                " entries, groups expect " + std::to_string(gs.dimension()));
  }
  check_finite(u, lambda, "prox_overlapping_linf");
  const bool keep = options.keep_group_flows || options.certify;
  const std::size_t p = u.size();
  ProxResult result;

  if (lambda == 0.0 || gs.empty()) {
    result.w.assign(u.begin(), u.end());
    result.xi_bar.assign(p, 0.0);
    if (keep) {
      for (std::size_t g = 0; g < gs.size(); ++g) result.group_flows.emplace_back(gs.group_size(g), 0.0);
    }
  } else {
    std::vector<double> magnitude(p);
    for (std::size_t j = 0; j < p; ++j) magnitude[j] = std::abs(u[j]);
    FlowGraph root = build_canonical(gs, magnitude, lambda);
    if (options.simplify_nested) root = simplify_nested(root, gs, options.nesting_cap);

    FlowResult flow = compute_flow(root, options);
    result.stats = flow.stats;
    result.w.resize(p);
    result.xi_bar.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
      const double sign = u[j] < 0.0 ? -1.0 : 1.0;
      const double xi = std::min(flow.xi_bar[j], magnitude[j]);
      result.xi_bar[j] = sign * xi;
      result.w[j] = sign * (magnitude[j] - xi);
    }
    if (keep) {
      result.group_flows = decompose_group_flows(root, flow.arc_flow, gs);
      for (std::size_t g = 0; g < gs.size(); ++g) {
        const auto members = gs.group(g);
        for (std::size_t k = 0; k < members.size(); ++k) {
          if (u[members[k]] < 0.0) result.group_flows[g][k] = -result.group_flows[g][k];
        }
      }
    }
  }
  if (options.certify) {
    result.certificate = certify_prox(u, gs, lambda, result.w, result.group_flows);
  }
  return result;
}

std::vector<double> prox_l1(std::span<const double> u, double lambda) {
  std::vector<double> w(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) {
    const double m = std::abs(u[j]) - lambda;
    w[j] = m > 0.0 ? std::copysign(m, u[j]) : 0.0;
  }
  return w;
}

void prox_single_group(std::span<double> x, double t, NormKind norm, std::vector<double>& scratch) {
  if (t <= 0.0 || x.empty()) return;
  if (norm == NormKind::kL2) {
    double sq = 0.0;
    for (double v : x) sq += v * v;
    const double nrm = std::sqrt(sq);
    const double scale = nrm <= t ? 0.0 : 1.0 - t / nrm;
    for (double& v : x) v *= scale;
    return;
  }
  std::vector<double> mag(x.size());
  double total = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mag[k] = std::abs(x[k]);
    total += mag[k];
  }
  if (total <= t) {
    std::fill(x.begin(), x.end(), 0.0);
    return;
  }
  std::vector<double> proj(x.size());
  project_l1_ball(mag, t, proj, scratch);
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = std::copysign(mag[k] - proj[k], x[k]);
}

namespace {

std::vector<double> apply_groups(std::span<const double> u, const GroupStructure& gs,
                                 double lambda, NormKind norm, const std::vector<std::size_t>& order) {
  std::vector<double> w(u.begin(), u.end());
  std::vector<double> block, scratch;
  for (std::size_t g : order) {
    const auto members = gs.group(g);
    block.resize(members.size());
    for (std::size_t k = 0; k < members.size(); ++k) block[k] = w[members[k]];
    prox_single_group(block, lambda * gs.weight(g), norm, scratch);
    for (std::size_t k = 0; k < members.size(); ++k) w[members[k]] = block[k];
  }
  return w;
}

std::vector<double> partition_prox(std::span<const double> u, const GroupStructure& gs,
                                   double lambda, NormKind norm, const char* who) {
  if (u.size() != gs.dimension()) throw std::invalid_argument(std::string(who) + ": dimension mismatch");
  check_finite(u, lambda, who);
  if (!gs.is_non_overlapping()) throw std::invalid_argument(std::string(who) + ": groups overlap");
  std::vector<std::size_t> order(gs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  return apply_groups(u, gs, lambda, norm, order);
}

}  // namespace

std::vector<double> prox_group_l2(std::span<const double> u, const GroupStructure& gs,
                                  double lambda) {
  return partition_prox(u, gs, lambda, NormKind::kL2, "prox_group_l2");
}

std::vector<double> prox_group_linf(std::span<const double> u, const GroupStructure& gs,
                                    double lambda) {
  return partition_prox(u, gs, lambda, NormKind::kLinf, "prox_group_linf");
}

std::vector<double> prox_tree(std::span<const double> u, const GroupStructure& gs, double lambda,
                              NormKind norm) {
  if (u.size() != gs.dimension()) throw std::invalid_argument("prox_tree: dimension mismatch");
  check_finite(u, lambda, "prox_tree");
  if (!gs.is_tree_structured()) throw std::invalid_argument("prox_tree: groups are not tree-structured");
  // A strict subset is strictly smaller, so ascending size puts children first.
  std::vector<std::size_t> order(gs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return gs.group_size(a) < gs.group_size(b); });
  return apply_groups(u, gs, lambda, norm, order);
}

bool has_exact_prox(const GroupStructure& gs, NormKind norm) {
  return norm == NormKind::kLinf || gs.is_non_overlapping() || gs.is_tree_structured();
}

std::vector<double> prox_exact(std::span<const double> u, const GroupStructure& gs, double lambda,
                               NormKind norm, const ProxOptions& options) {
  if (gs.is_non_overlapping()) {
    return norm == NormKind::kL2 ? prox_group_l2(u, gs, lambda) : prox_group_linf(u, gs, lambda);
  }
  if (gs.is_tree_structured()) return prox_tree(u, gs, lambda, norm);
  if (norm == NormKind::kLinf) return prox_overlapping_linf(u, gs, lambda, options).w;
  throw std::invalid_argument("no exact prox for overlapping l2 groups; use ADMM");
}

}  // namespace structflow
