#include "structflow/duality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "structflow/flowgraph.hpp"
#include "structflow/prox.hpp"

namespace structflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Piece {
  FlowGraph graph;
  std::vector<double> flow;
};

// Whether κ is non-zero on a coordinate that no group covers.
bool uncovered_mass(std::span<const double> kappa, const GroupStructure& gs) {
  for (std::size_t j = 0; j < kappa.size(); ++j) {
    if (kappa[j] != 0.0 && gs.groups_of(j).empty()) return true;
  }
  return false;
}

std::vector<double> carry(const std::vector<double>& flow, const std::vector<Index>& map) {
  std::vector<double> out(map.size());
  for (std::size_t a = 0; a < map.size(); ++a) out[a] = flow[map[a]];
  return out;
}

class DualNormSolver {
 public:
  DualNormSolver(const DualNormOptions& opt, DualNormStats& stats) : opt_(opt), stats_(stats) {
    preflow_opt_ = opt.maxflow;
    preflow_opt_.complete = false;
  }

  double run(FlowGraph root) {
    push({std::move(root), {}});
    double tau = 0.0;
    while (!stack_.empty()) {
      Piece piece = std::move(stack_.back());
      stack_.pop_back();
      tau = std::max(tau, process(piece));
    }
    return tau;
  }

 private:
  void push(Piece piece) {
    if (opt_.use_components && piece.graph.num_groups() > 1) {
      std::vector<Index> label;
      const Index parts = component_labels(piece.graph, label);
      if (parts > 1) {
        std::vector<std::vector<Index>> maps;
        auto graphs = split_by_label(piece.graph, label, parts, &maps);
        for (Index k = 0; k < parts; ++k) {
          stack_.push_back({std::move(graphs[k]), piece.flow.empty() ? std::vector<double>{}
                                                                      : carry(piece.flow, maps[k])});
        }
        return;
      }
    }
    stack_.push_back(std::move(piece));
  }

  // τ of one piece, pushing its unsaturated part when τ is too small.
  double process(Piece& piece) {
    const FlowGraph& g = piece.graph;
    const auto kappa = g.targets();
    double mass = 0.0, weight = 0.0;
    for (double k : kappa) mass += k;
    for (double eta : g.group_weights()) weight += eta;
    if (mass == 0.0) return 0.0;
    const double tau = mass / weight;

    FlowState state = make_flow_state(g, kappa);
    for (Index k = 0; k < g.num_groups(); ++k) {
      state.capacity[g.source_arcs()[k]] = tau * g.group_weights()[k];
    }
    if (!piece.flow.empty()) state.flow = std::move(piece.flow);
    solve_preflow(g, state, preflow_opt_);
    ++stats_.max_flow_calls;

    double worst = 0.0;
    for (Index j = 0; j < g.num_variables(); ++j) {
      worst = std::max(worst, (kappa[j] - state.flow[g.sink_arcs()[j]]) / (1.0 + kappa[j]));
    }
    if (worst <= opt_.termination_tol) return tau;

    // Everything that can still reach t needs a larger τ; the rest is
    // saturated by its own groups alone.
    const std::vector<char> mark = reaches_sink(g, state, opt_.maxflow.saturation_tol);
    std::vector<Index> label(g.source(), -1);
    std::size_t sink_side = 0;
    for (Index v = 0; v < g.source(); ++v) {
      if (mark[v]) {
        label[v] = 0;
        ++sink_side;
      }
    }
    if (sink_side == static_cast<std::size_t>(g.source())) {
      if (worst > 1e-6) {
        throw std::runtime_error("dual_norm: no vertex left the sink side (deficit " +
                                 std::to_string(worst) + ")");
      }
      return tau;
    }
    ++stats_.splits;
    std::vector<std::vector<Index>> maps;
    auto graphs = split_by_label(g, label, 1, &maps);
    push({std::move(graphs[0]), carry(state.flow, maps[0])});
    return tau;
  }

  const DualNormOptions& opt_;
  DualNormStats& stats_;
  MaxFlowOptions preflow_opt_;
  std::vector<Piece> stack_;
};

double dual_norm_linf(std::span<const double> kappa, const GroupStructure& gs,
                      const DualNormOptions& options, DualNormStats& stats) {
  std::vector<double> a(kappa.size());
  for (std::size_t j = 0; j < a.size(); ++j) a[j] = std::abs(kappa[j]);
  DualNormSolver solver(options, stats);
  return solver.run(build_canonical(gs, a, 1.0));
}

double dual_norm_l2(std::span<const double> kappa, const GroupStructure& gs) {
  if (gs.is_non_overlapping()) {
    double tau = 0.0;
    for (std::size_t g = 0; g < gs.size(); ++g) {
      double sq = 0.0;
      for (Index j : gs.group(g)) sq += kappa[j] * kappa[j];
      tau = std::max(tau, std::sqrt(sq) / gs.weight(g));
    }
    return tau;
  }
  if (!gs.is_tree_structured()) {
    throw std::invalid_argument("dual_norm: overlapping l2 groups are supported on trees only");
  }
  // Ω*(κ) <= τ exactly when the prox of τΩ maps κ to zero.
  auto zero_at = [&](double tau) {
    const auto w = prox_tree(kappa, gs, tau, NormKind::kL2);
    return std::all_of(w.begin(), w.end(), [](double x) { return x == 0.0; });
  };
  double norm = 0.0, eta_min = kInf;
  for (double k : kappa) norm += k * k;
  for (double eta : gs.weights()) eta_min = std::min(eta_min, eta);
  if (norm == 0.0) return 0.0;
  double lo = 0.0, hi = std::sqrt(norm) / eta_min;
  while (!zero_at(hi)) {
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > 1e-13 * hi) {
    const double mid = 0.5 * (lo + hi);
    (zero_at(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace

double omega(std::span<const double> w, const GroupStructure& gs, NormKind norm) {
  if (w.size() != gs.dimension()) throw std::invalid_argument("omega: dimension mismatch");
  double total = 0.0;
  for (std::size_t g = 0; g < gs.size(); ++g) {
    double n = 0.0;
    if (norm == NormKind::kLinf) {
      for (Index j : gs.group(g)) n = std::max(n, std::abs(w[j]));
    } else {
      for (Index j : gs.group(g)) n += w[j] * w[j];
      n = std::sqrt(n);
    }
    total += gs.weight(g) * n;
  }
  return total;
}

double dual_norm(std::span<const double> kappa, const GroupStructure& gs, NormKind norm,
                 const DualNormOptions& options, DualNormStats* stats) {
  if (gs.empty()) throw std::invalid_argument("dual_norm: empty group structure");
  if (kappa.size() != gs.dimension()) throw std::invalid_argument("dual_norm: dimension mismatch");
  for (double k : kappa) {
    if (!std::isfinite(k)) throw std::invalid_argument("dual_norm: non-finite entry");
  }
  if (uncovered_mass(kappa, gs)) return kInf;
  DualNormStats local;
  const double tau = norm == NormKind::kLinf ? dual_norm_linf(kappa, gs, options, local)
                                             : dual_norm_l2(kappa, gs);
  if (stats) *stats = local;
  return tau;
}

GapEvaluation evaluate_gap(std::span<const double> w, const DesignMatrix& x, const Loss& loss,
                           double lambda, const GroupStructure& gs, NormKind norm) {
  const std::size_t n = x.rows(), p = x.cols();
  if (w.size() != p || gs.dimension() != p || loss.size() != n) {
    throw std::invalid_argument("duality gap: dimensions of w, X, y and the groups disagree");
  }
  std::vector<double> z(n), grad(n), xt(p);
  x.apply(w, z);
  loss.gradient(z, grad);
  x.apply_transpose(grad, xt);

  GapEvaluation ev;
  ev.primal = loss.value(z) + (lambda > 0.0 ? lambda * omega(w, gs, norm) : 0.0);
  try {
    ev.dual_norm = gs.empty() ? (std::all_of(xt.begin(), xt.end(), [](double v) { return v == 0.0; })
                                     ? 0.0
                                     : kInf)
                              : dual_norm(xt, gs, norm);
  } catch (const std::invalid_argument&) {
    ev.dual_norm = kInf;
    ev.rho = kInf;
    ev.dual = -kInf;
    ev.gap = kInf;
    return ev;
  }
  if (ev.dual_norm == 0.0) {
    ev.rho = 1.0;
  } else if (lambda > 0.0) {
    ev.rho = std::max(ev.dual_norm / lambda, 1.0);
  } else {
    ev.rho = kInf;
  }
  // −κ = ∇f(Xw)/ρ.
  std::vector<double> minus_kappa(n, 0.0);
  if (std::isfinite(ev.rho)) {
    for (std::size_t i = 0; i < n; ++i) minus_kappa[i] = grad[i] / ev.rho;
  }
  ev.dual = -loss.conjugate(minus_kappa);
  ev.gap = ev.primal - ev.dual;
  return ev;
}

double duality_gap(std::span<const double> w, const DesignMatrix& x, const Loss& loss, double lambda,
                   const GroupStructure& gs, NormKind norm) {
  return evaluate_gap(w, x, loss, lambda, gs, norm).gap;
}

}  // namespace structflow
