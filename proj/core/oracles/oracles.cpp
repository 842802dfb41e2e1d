#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <numeric>

namespace structflow::oracle {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

std::vector<double> sorted_l1_projection(std::span<const double> v, double radius) {
  double total = 0.0;
  for (double x : v) total += x;
  if (total <= radius) return {v.begin(), v.end()};
  std::vector<double> sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double prefix = 0.0, theta = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    prefix += sorted[k];
    const double candidate = (prefix - radius) / static_cast<double>(k + 1);
    if (sorted[k] - candidate > 0.0) theta = candidate;
  }
  std::vector<double> out(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) out[j] = std::max(v[j] - theta, 0.0);
  return out;
}

std::vector<double> bisect_l1_box_projection(std::span<const double> v, double radius,
                                             std::span<const double> ub) {
  auto at = [&](double theta) {
    std::vector<double> g(v.size());
    for (std::size_t j = 0; j < v.size(); ++j) g[j] = std::clamp(v[j] - theta, 0.0, ub[j]);
    return g;
  };
  auto mass = [&](double theta) {
    double s = 0.0;
    for (double x : at(theta)) s += x;
    return s;
  };
  if (mass(0.0) <= radius) return at(0.0);
  double lo = 0.0, hi = *std::max_element(v.begin(), v.end());
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mass(mid) > radius ? lo : hi) = mid;
  }
  return at(hi);
}

DualProxResult prox_dual(std::span<const double> u, const GroupStructure& gs, double lambda,
                         std::size_t max_sweeps, double change_tol, bool keep_objective) {
  const std::size_t p = u.size();
  DualProxResult res;
  std::vector<double> a(p);
  for (std::size_t j = 0; j < p; ++j) a[j] = std::abs(u[j]);
  res.xi_bar.assign(p, 0.0);
  res.group_flows.resize(gs.size());
  for (std::size_t g = 0; g < gs.size(); ++g) res.group_flows[g].assign(gs.group_size(g), 0.0);

  if (lambda > 0.0) {
    std::vector<double> r;
    for (res.sweeps = 1; res.sweeps <= max_sweeps; ++res.sweeps) {
      double change = 0.0;
      for (std::size_t g = 0; g < gs.size(); ++g) {
        const auto members = gs.group(g);
        auto& xi = res.group_flows[g];
        r.resize(members.size());
        for (std::size_t k = 0; k < members.size(); ++k) {
          const std::size_t j = members[k];
          r[k] = std::max(a[j] - res.xi_bar[j] + xi[k], 0.0);
        }
        const std::vector<double> next = sorted_l1_projection(r, lambda * gs.weight(g));
        for (std::size_t k = 0; k < members.size(); ++k) {
          const std::size_t j = members[k];
          change = std::max(change, std::abs(next[k] - xi[k]));
          res.xi_bar[j] += next[k] - xi[k];
          xi[k] = next[k];
        }
      }
      if (keep_objective) {
        double obj = 0.0;
        for (std::size_t j = 0; j < p; ++j) obj += 0.5 * (a[j] - res.xi_bar[j]) * (a[j] - res.xi_bar[j]);
        res.objective.push_back(obj);
      }
      if (change <= change_tol) {
        res.converged = true;
        break;
      }
    }
  } else {
    res.converged = true;
  }
  res.w.resize(p);
  for (std::size_t j = 0; j < p; ++j) {
    const double sign = u[j] < 0.0 ? -1.0 : 1.0;
    res.w[j] = sign * (a[j] - res.xi_bar[j]);
    res.xi_bar[j] *= sign;
  }
  for (std::size_t g = 0; g < gs.size(); ++g) {
    const auto members = gs.group(g);
    for (std::size_t k = 0; k < members.size(); ++k) {
      if (u[members[k]] < 0.0) res.group_flows[g][k] = -res.group_flows[g][k];
    }
  }
  return res;
}

double edmonds_karp(int n, int source, int sink, const std::vector<std::tuple<int, int, double>>& arcs) {
  // Residual capacities in a dense matrix; the instances are small.
  std::vector<std::vector<double>> cap(n, std::vector<double>(n, 0.0));
  for (const auto& [from, to, c] : arcs) cap[from][to] += c;
  double value = 0.0;
  std::vector<int> prev(n);
  while (true) {
    std::fill(prev.begin(), prev.end(), -1);
    prev[source] = source;
    std::deque<int> queue{source};
    while (!queue.empty() && prev[sink] == -1) {
      const int v = queue.front();
      queue.pop_front();
      for (int w = 0; w < n; ++w) {
        if (prev[w] == -1 && cap[v][w] > 1e-13) {
          prev[w] = v;
          queue.push_back(w);
        }
      }
    }
    if (prev[sink] == -1) break;
    double bottleneck = kInf;
    for (int v = sink; v != source; v = prev[v]) bottleneck = std::min(bottleneck, cap[prev[v]][v]);
    if (!(bottleneck < kInf)) return kInf;
    for (int v = sink; v != source; v = prev[v]) {
      cap[prev[v]][v] -= bottleneck;
      if (cap[v][prev[v]] < kInf) cap[v][prev[v]] += bottleneck;
    }
    value += bottleneck;
  }
  return value;
}

double max_flow_ek(const FlowGraph& graph, std::span<const double> sink_caps) {
  std::vector<std::tuple<int, int, double>> arcs;
  for (const Arc& arc : graph.arcs()) {
    double c = arc.capacity;
    if (arc.kind == ArcKind::kInternal) c = kInf;
    if (arc.kind == ArcKind::kSink) c = sink_caps[arc.tail];
    arcs.emplace_back(arc.tail, arc.head, c);
  }
  return edmonds_karp(graph.num_vertices(), graph.source(), graph.sink(), arcs);
}

double dual_norm_bisect(std::span<const double> kappa, const GroupStructure& gs, double tol) {
  const int p = static_cast<int>(kappa.size());
  const int ng = static_cast<int>(gs.size());
  double total = 0.0;
  for (int j = 0; j < p; ++j) {
    const double m = std::abs(kappa[j]);
    total += m;
    if (m > 0.0 && gs.groups_of(j).empty()) return kInf;
  }
  if (total == 0.0) return 0.0;
  double min_eta = kInf;
  for (int g = 0; g < ng; ++g) min_eta = std::min(min_eta, gs.weight(g));

  // Vertices: variables 0..p-1, groups p..p+ng-1, source, sink.
  const int s = p + ng, t = s + 1;
  auto feasible = [&](double tau) {
    std::vector<std::tuple<int, int, double>> arcs;
    for (int g = 0; g < ng; ++g) {
      arcs.emplace_back(s, p + g, tau * gs.weight(g));
      for (Index j : gs.group(g)) arcs.emplace_back(p + g, j, kInf);
    }
    for (int j = 0; j < p; ++j) arcs.emplace_back(j, t, std::abs(kappa[j]));
    return edmonds_karp(p + ng + 2, s, t, arcs) >= total * (1.0 - 1e-13);
  };
  double lo = 0.0, hi = total / min_eta;
  const double width = tol * std::max(1.0, hi);
  while (hi - lo > width) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

double omega_linf(std::span<const double> w, const GroupStructure& gs) {
  double total = 0.0;
  for (std::size_t g = 0; g < gs.size(); ++g) {
    double m = 0.0;
    for (Index j : gs.group(g)) m = std::max(m, std::abs(w[j]));
    total += gs.weight(g) * m;
  }
  return total;
}

}  // namespace structflow::oracle
