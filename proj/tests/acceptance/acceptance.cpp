// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>

#include "instances.hpp"
#include "oracles.hpp"
#include "structflow/cur.hpp"
#include "structflow/duality.hpp"
#include "structflow/generator.hpp"
#include "structflow/maxflow.hpp"
#include "structflow/projection.hpp"
#include "structflow/prox.hpp"
#include "structflow/solvers.hpp"

using namespace structflow;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

// Certificates collected by criteria 1 and 2 for criterion 3.
struct CertificateTally {
  std::size_t checked = 0;
  std::size_t failed = 0;
};
CertificateTally g_certificates;

ProxResult certified_prox(std::span<const double> u, const GroupStructure& gs, double lambda,
                          ProxOptions opt = {}) {
  opt.certify = true;
  auto r = prox_overlapping_linf(u, gs, lambda, opt);
  ++g_certificates.checked;
  if (!r.certificate || !r.certificate->passed) ++g_certificates.failed;
  return r;
}

Outcome oracle_equivalence() {
  fixture::Rng rng(1001);
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const std::size_t p = fixture::uniform_index(rng, 2, 30);
    auto gs = fixture::random_groups(rng, p, fixture::uniform_index(rng, 2, 12), 8);
    auto u = fixture::random_vector(rng, p);
    const double lambda = std::pow(10.0, fixture::uniform(rng, -2.0, 1.0));
    auto w = certified_prox(u, gs, lambda).w;
    worst = std::max(worst, fixture::max_abs_diff(w, oracle::prox_dual(u, gs, lambda).w));
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-6 && t <= 120.0, fmt("max |w_flow - w_oracle| = %.2e over 200 instances in %.1fs", worst, t)};
}

Outcome closed_forms() {
  fixture::Rng rng(1002);
  double e_l1 = 0.0, e_part = 0.0, e_tree = 0.0;
  for (int k = 0; k < 100; ++k) {
    const std::size_t p = fixture::uniform_index(rng, 1, 200);
    auto u = fixture::random_vector(rng, p);
    const double lambda = std::pow(10.0, fixture::uniform(rng, -2.0, 0.5));
    e_l1 = std::max(e_l1, fixture::max_abs_diff(certified_prox(u, make_singletons(p), lambda).w,
                                                prox_l1(u, lambda)));
  }
  for (int k = 0; k < 100; ++k) {
    const std::size_t p = fixture::uniform_index(rng, 1, 200);
    auto blocks = fixture::random_blocks(rng, p, 10);
    std::vector<double> weights(blocks.size());
    for (double& w : weights) w = fixture::uniform(rng, 0.5, 2.0);
    GroupStructure gs(p, blocks, weights);
    auto u = fixture::random_vector(rng, p);
    const double lambda = std::pow(10.0, fixture::uniform(rng, -2.0, 0.5));
    e_part = std::max(e_part, fixture::max_abs_diff(certified_prox(u, gs, lambda).w,
                                                    prox_group_linf(u, gs, lambda)));
  }
  for (int k = 0; k < 100; ++k) {
    const std::size_t p = fixture::uniform_index(rng, 2, 1000);
    auto gs = make_tree(fixture::random_parents(rng, p, 0.05));
    auto u = fixture::random_vector(rng, p);
    const double lambda = std::pow(10.0, fixture::uniform(rng, -3.0, -0.5));
    e_tree = std::max(e_tree, fixture::max_abs_diff(certified_prox(u, gs, lambda).w,
                                                    prox_tree(u, gs, lambda, NormKind::kLinf)));
  }
  const double worst = std::max({e_l1, e_part, e_tree});
  return {worst <= 1e-9, fmt("max error: singletons %.1e, partitions %.1e, trees %.1e", e_l1, e_part, e_tree)};
}

Outcome certificates() {
  return {g_certificates.checked > 0 && g_certificates.failed == 0,
          fmt("%.0f of %.0f prox results certified", static_cast<double>(g_certificates.checked - g_certificates.failed),
              static_cast<double>(g_certificates.checked))};
}

Outcome dual_norms() {
  fixture::Rng rng(1004);
  double e_exact = 0.0, e_oracle = 0.0;
  std::size_t sweep_errors = 0;
  for (int k = 0; k < 100; ++k) {
    const std::size_t p = fixture::uniform_index(rng, 1, 100);
    auto kappa = fixture::random_vector(rng, p);
    e_exact = std::max(e_exact, std::abs(dual_norm(kappa, make_singletons(p)) - fixture::max_abs(kappa)));
    auto blocks = fixture::random_blocks(rng, p, 8);
    std::vector<double> weights(blocks.size());
    for (double& w : weights) w = fixture::uniform(rng, 0.5, 2.0);
    double expect = 0.0;
    for (std::size_t g = 0; g < blocks.size(); ++g) {
      double l1 = 0.0;
      for (Index j : blocks[g]) l1 += std::abs(kappa[j]);
      expect = std::max(expect, l1 / weights[g]);
    }
    e_exact = std::max(e_exact, std::abs(dual_norm(kappa, GroupStructure(p, blocks, weights)) - expect));
  }
  for (int k = 0; k < 100; ++k) {
    const std::size_t p = fixture::uniform_index(rng, 2, 50);
    auto gs = fixture::random_groups(rng, p, fixture::uniform_index(rng, 2, 20), 8);
    auto kappa = fixture::random_vector(rng, p);
    const double d = dual_norm(kappa, gs);
    const double ref = oracle::dual_norm_bisect(kappa, gs);
    e_oracle = std::max(e_oracle, std::abs(d - ref) / std::max(ref, 1e-300));
    const double scale = 1e-9 * (1.0 + fixture::max_abs(kappa));
    for (double f : {0.5, 0.9, 0.99, 0.999, 1.001, 1.01, 1.1, 2.0}) {
      const bool zero = fixture::max_abs(prox_overlapping_linf(kappa, gs, f * d).w) <= scale;
      if (zero != (f * d >= d)) ++sweep_errors;
    }
  }
  return {e_exact <= 1e-10 && e_oracle <= 1e-6 && sweep_errors == 0,
          fmt("exact cases %.1e, oracle rel. %.1e, threshold mismatches %.0f", e_exact, e_oracle,
              static_cast<double>(sweep_errors))};
}

Outcome max_flows() {
  fixture::Rng rng(1005);
  double e_cold = 0.0, e_warm = 0.0;
  for (int k = 0; k < 500; ++k) {
    const std::size_t p = fixture::uniform_index(rng, 2, 120);
    const std::size_t ng = fixture::uniform_index(rng, 1, 198 - p > 60 ? 60 : 198 - p);
    auto gs = fixture::random_groups(rng, p, ng, 10);
    FlowGraph g = build_canonical(gs, std::vector<double>(p, 1.0), fixture::uniform(rng, 0.05, 2.0));
    std::vector<double> caps(p);
    for (double& c : caps) c = fixture::uniform(rng, 0.0, 2.0);
    e_cold = std::max(e_cold, std::abs(max_flow(g, caps).value - oracle::max_flow_ek(g, caps)));
  }
  for (int k = 0; k < 100; ++k) {
    const std::size_t p = fixture::uniform_index(rng, 3, 80);
    auto gs = fixture::random_groups(rng, p, fixture::uniform_index(rng, 1, 40), 8);
    FlowGraph g = build_canonical(gs, std::vector<double>(p, 1.0), fixture::uniform(rng, 0.1, 1.5));
    std::vector<double> caps(p);
    for (double& c : caps) c = fixture::uniform(rng, 0.0, 1.0);
    FlowState st = max_flow(g, caps);
    for (int step = 0; step < 10; ++step) {
      for (double& c : caps) {
        if (fixture::uniform(rng, 0.0, 1.0) < 0.3) c = std::max(0.0, c + fixture::uniform(rng, -0.5, 0.5));
      }
      st = warm_restart(g, std::move(st), caps);
      e_warm = std::max(e_warm, std::abs(st.value - max_flow(g, caps).value));
    }
  }
  return {e_cold <= 1e-9 && e_warm <= 1e-9,
          fmt("push-relabel vs Edmonds-Karp %.1e on 500 graphs, warm vs cold %.1e on 100 sequences", e_cold,
              e_warm)};
}

Outcome graph_equivalence() {
  fixture::Rng rng(1006);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const std::size_t p = fixture::uniform_index(rng, 2, 300);
    auto gs = make_tree(fixture::random_parents(rng, p, fixture::uniform(rng, 0.01, 0.3)));
    auto u = fixture::random_vector(rng, p);
    const double lambda = std::pow(10.0, fixture::uniform(rng, -3.0, 0.0));
    ProxOptions plain, simple;
    plain.simplify_nested = false;
    simple.simplify_nested = true;
    worst = std::max(worst, fixture::max_abs_diff(prox_overlapping_linf(u, gs, lambda, plain).w,
                                                  prox_overlapping_linf(u, gs, lambda, simple).w));
  }
  return {worst <= 1e-9, fmt("simplified vs canonical graph: %.1e on 100 forests", worst)};
}

Outcome solver_agreement() {
  fixture::Rng rng(1007);
  double worst_rel = 0.0, worst_gap = 0.0;
  for (int k = 0; k < 20; ++k) {
    const std::size_t n = fixture::uniform_index(rng, 20, 100);
    const bool grid = k % 2 == 1;
    const std::size_t side = fixture::uniform_index(rng, 4, 22);
    const std::size_t p = grid ? side * side : fixture::uniform_index(rng, 20, 500);
    auto gen = gen_problem(2000 + static_cast<std::uint64_t>(k), n, std::min<std::size_t>(p, 500),
                           grid ? GroupFamily::kGrid3x3 : GroupFamily::kWindows3);
    Problem pr{DesignMatrix(gen.X), Loss::square(gen.y), 0.0, gen.groups};
    pr.lambda = 0.1 * zero_threshold(pr);
    FistaOptions fo;
    fo.gap_tol = 1e-6;
    fo.max_iter = 100000;
    auto f = fista(pr, fo);
    worst_gap = std::max(worst_gap, f.trace.final_gap);
    const double of = objective(pr, f.w);
    // A certified gap of 1e-5·objective puts each ADMM run well inside the
    // agreement tolerance; γ = 0.1 suits the loss split on these designs.
    AdmmOptions ao;
    ao.tol = 1e-10;
    ao.max_iter = 200000;
    ao.gap_tol = 1e-5 * of;
    ao.gap_every = 20;
    const double ol = objective(pr, admm_linearized(pr, ao).w);
    ao.gamma = 0.1;
    const double oa = objective(pr, admm_loss_split(pr, ao).w);
    const double hi = std::max({of, oa, ol}), lo = std::min({of, oa, ol});
    worst_rel = std::max(worst_rel, (hi - lo) / std::max(std::abs(lo), 1e-300));
  }

  // Equal-time comparison against the subgradient method on (100, 1000).
  auto gen = gen_problem(3000, 100, 1000, GroupFamily::kWindows3);
  Problem pr{DesignMatrix(gen.X), Loss::square(gen.y), 0.0, gen.groups};
  pr.lambda = 0.1 * zero_threshold(pr);
  FistaOptions fo;
  fo.gap_tol = 0.0;
  fo.max_iter = std::numeric_limits<std::size_t>::max();
  fo.max_seconds = 2.0;
  SubgradientOptions so;
  so.max_iter = std::numeric_limits<std::size_t>::max();
  so.max_seconds = 2.0;
  const double f_obj = objective(pr, fista(pr, fo).w);
  const double s_obj = objective(pr, subgradient(pr, so).w);
  return {worst_rel <= 1e-3 && worst_gap <= 1e-6 && f_obj < s_obj,
          fmt("max rel. spread %.1e, max FISTA gap %.1e; at 2s FISTA %.6g vs SG %.6g", worst_rel, worst_gap, f_obj,
              s_obj)};
}

Outcome large_prox() {
  std::vector<double> times;
  bool certified = false;
  for (int e : {14, 16, 18}) {
    const std::size_t side = std::size_t{1} << (e / 2);
    auto gs = make_grid_squares(side, side, 2, false);
    fixture::Rng rng(1008);
    auto u = fixture::random_vector(rng, side * side);
    ProxOptions opt;
    opt.certify = e == 18;
    const auto t0 = Clock::now();
    auto r = prox_overlapping_linf(u, gs, 0.1, opt);
    times.push_back(seconds_since(t0));
    if (e == 18) certified = r.certificate && r.certificate->passed;
  }
  // Without certification overhead at the largest size, for the exponent.
  {
    auto gs = make_grid_squares(512, 512, 2, false);
    fixture::Rng rng(1008);
    auto u = fixture::random_vector(rng, 512 * 512);
    const auto t0 = Clock::now();
    prox_overlapping_linf(u, gs, 0.1);
    times.push_back(seconds_since(t0));
  }
  const double slope = std::log(times[3] / times[0]) / std::log(16.0);
  return {times[2] <= 120.0 && certified && slope < 2.0,
          fmt("p=2^18 in %.2fs (certified), times 2^14/2^16/2^18 = %.3f/%.3f/%.3fs", times[2], times[0], times[1],
              times[3]) +
              fmt(", exponent %.2f", slope)};
}

Outcome cur_recovery() {
  auto planted = planted_cur_matrix(20, 15, 2, 0.01, 1);
  auto grid = cur_grid(normalize_cur_input(planted.X), 8);
  std::size_t hits = 0;
  double best = 0.0;
  for (double lr : grid.rows) {
    for (double lc : grid.cols) {
      auto r = cur_solve(planted.X, lr, lc);
      if (r.rows == planted.planted_cols && r.cols == planted.planted_rows) {
        best = std::max(best, r.refit_variance);
        if (r.refit_variance >= 0.95) ++hits;
      }
    }
  }
  auto empty = cur_solve(planted.X, 1e8, 1e8);
  const bool none = empty.rows.empty() && empty.cols.empty() && empty.refit_variance == 0.0;
  return {hits > 0 && none, fmt("%.0f of 64 grid points recover the planted supports (best variance %.4f); "
                                "large penalty selects %.0f rows",
                                static_cast<double>(hits), best, static_cast<double>(empty.rows.size()))};
}

Outcome projections() {
  fixture::Rng rng(1010);
  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const auto p = static_cast<std::size_t>(std::pow(10.0, fixture::uniform(rng, 0.0, 5.0)));
    std::vector<double> v(p);
    for (double& x : v) x = fixture::uniform(rng, 0.0, 1.0);
    const double r = fixture::uniform(rng, 0.0, 0.5 * static_cast<double>(p));
    worst = std::max(worst, fixture::max_abs_diff(project_l1_ball(v, r), oracle::sorted_l1_projection(v, r)));
  }
  auto median_time = [&](std::size_t p) {
    std::vector<double> v(p), out(p), scratch, times;
    for (int rep = 0; rep < 31; ++rep) {
      for (double& x : v) x = fixture::uniform(rng, 0.0, 1.0);
      const auto t0 = Clock::now();
      project_l1_ball(v, 0.1 * static_cast<double>(p), out, scratch);
      times.push_back(seconds_since(t0));
    }
    std::nth_element(times.begin(), times.begin() + 15, times.end());
    return times[15];
  };
  const double t4 = median_time(10000), t5 = median_time(100000);
  return {worst <= 1e-12 && t5 / t4 <= 15.0,
          fmt("max error %.1e on 10^4 instances; time ratio p=1e5/1e4 = %.1f", worst, t5 / t4)};
}

}  // namespace

int main(int argc, char** argv) {
  // Optional arguments select criteria by number; all run by default.
  std::vector<bool> selected(10, argc <= 1);
  for (int a = 1; a < argc; ++a) {
    const int k = std::atoi(argv[a]);
    if (k >= 1 && k <= 10) selected[static_cast<std::size_t>(k - 1)] = true;
  }
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"prox matches the dual oracle", oracle_equivalence},
      {"prox matches closed forms", closed_forms},
      {"optimality certificates", certificates},
      {"dual norm", dual_norms},
      {"max-flow and warm restarts", max_flows},
      {"nested-graph simplification", graph_equivalence},
      {"solver agreement", solver_agreement},
      {"large grid prox", large_prox},
      {"CUR support recovery", cur_recovery},
      {"l1-ball projection", projections},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    if (!selected[k]) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("criterion %2zu: %s  %s: %s [%.1fs]\n", k + 1, o.pass ? "PASS" : "FAIL", criteria[k].first,
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
