#include <benchmark/benchmark.h>

#include "structflow/duality.hpp"
#include "structflow/generator.hpp"
#include "structflow/maxflow.hpp"
#include "structflow/projection.hpp"
#include "structflow/prox.hpp"
#include "structflow/random.hpp"
#include "structflow/solvers.hpp"

using namespace structflow;

namespace {

std::vector<double> normals(std::size_t p, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<double> v(p);
  for (double& x : v) x = rng.normal();
  return v;
}

void BM_ProjectL1Ball(benchmark::State& state) {
  const auto p = static_cast<std::size_t>(state.range(0));
  SplitMix64 rng(1);
  std::vector<double> v(p), out(p), scratch;
  for (double& x : v) x = rng.uniform();
  for (auto _ : state) {
    project_l1_ball(v, 0.1 * static_cast<double>(p), out, scratch);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ProjectL1Ball)->RangeMultiplier(10)->Range(1000, 1000000)->Complexity(benchmark::oN);

// 2×2 squares on a side×side grid.
void BM_ProxGrid(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const auto gs = make_grid_squares(side, side, 2, false);
  const auto u = normals(side * side, 2);
  for (auto _ : state) benchmark::DoNotOptimize(prox_overlapping_linf(u, gs, 0.1).w.data());
  state.SetComplexityN(static_cast<std::int64_t>(side * side));
}
BENCHMARK(BM_ProxGrid)->Arg(64)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond)
    ->Complexity();

void BM_ProxWindows(benchmark::State& state) {
  const auto p = static_cast<std::size_t>(state.range(0));
  const auto gs = make_sliding_windows(p, 3);
  const auto u = normals(p, 3);
  for (auto _ : state) benchmark::DoNotOptimize(prox_overlapping_linf(u, gs, 0.3).w.data());
}
BENCHMARK(BM_ProxWindows)->RangeMultiplier(10)->Range(1000, 100000)->Unit(benchmark::kMillisecond);

void BM_MaxFlowWindows(benchmark::State& state) {
  const auto p = static_cast<std::size_t>(state.range(0));
  const auto gs = make_sliding_windows(p, 5);
  const FlowGraph g = build_canonical(gs, std::vector<double>(p, 1.0), 0.5);
  SplitMix64 rng(4);
  std::vector<double> caps(p);
  for (double& c : caps) c = rng.uniform();
  for (auto _ : state) benchmark::DoNotOptimize(max_flow(g, caps).value);
}
BENCHMARK(BM_MaxFlowWindows)->RangeMultiplier(10)->Range(1000, 100000)->Unit(benchmark::kMillisecond);

void BM_DualNormGrid(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const auto gs = make_grid_squares(side, side, 3, false);
  const auto k = normals(side * side, 5);
  for (auto _ : state) benchmark::DoNotOptimize(dual_norm(k, gs));
}
BENCHMARK(BM_DualNormGrid)->Arg(32)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_FistaWindows(benchmark::State& state) {
  const auto gen = gen_problem(6, 100, static_cast<std::size_t>(state.range(0)), GroupFamily::kWindows3);
  Problem pr{DesignMatrix(gen.X), Loss::square(gen.y), 0.0, gen.groups};
  pr.lambda = 0.1 * zero_threshold(pr);
  FistaOptions opt;
  opt.gap_tol = 1e-4;
  for (auto _ : state) benchmark::DoNotOptimize(fista(pr, opt).w.data());
}
BENCHMARK(BM_FistaWindows)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
