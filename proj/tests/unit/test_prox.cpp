#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "instances.hpp"
#include "oracles.hpp"
#include "structflow/prox.hpp"

using namespace structflow;

namespace {

double dist2(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
  return std::sqrt(s);
}

ProxOptions certified() {
  ProxOptions opt;
  opt.certify = true;
  return opt;
}

}  // namespace

TEST(ProxL1, Formula) {
  EXPECT_DOUBLE_EQ(prox_l1(std::vector<double>{2.0}, 0.5)[0], 1.5);
  EXPECT_DOUBLE_EQ(prox_l1(std::vector<double>{0.3}, 0.5)[0], 0.0);
  EXPECT_DOUBLE_EQ(prox_l1(std::vector<double>{-1.0}, 0.25)[0], -0.75);
}

TEST(ProxGroupL2, Formula) {
  GroupStructure gs(2, {{0, 1}}, {1.0});
  EXPECT_EQ(prox_group_l2(std::vector<double>{3, 4}, gs, 5.0), (std::vector<double>{0, 0}));
  auto w = prox_group_l2(std::vector<double>{3, 4}, gs, 2.5);
  EXPECT_DOUBLE_EQ(w[0], 1.5);
  EXPECT_DOUBLE_EQ(w[1], 2.0);
  EXPECT_EQ(prox_group_l2(std::vector<double>{3, 4}, gs, 0.0), (std::vector<double>{3, 4}));
  EXPECT_THROW(prox_group_l2(std::vector<double>{1, 1, 1}, make_sliding_windows(3, 2), 1.0),
               std::invalid_argument);
}

TEST(ProxGroupLinf, Formula) {
  GroupStructure gs(2, {{0, 1}}, {1.0});
  auto w = prox_group_linf(std::vector<double>{0.5, 0.1}, gs, 0.3);
  EXPECT_NEAR(w[0], 0.2, 1e-15);
  EXPECT_NEAR(w[1], 0.1, 1e-15);
  EXPECT_EQ(prox_group_linf(std::vector<double>{0.1, -0.1}, gs, 0.3), (std::vector<double>{0, 0}));
  EXPECT_EQ(prox_group_linf(std::vector<double>{0.1, -0.1}, gs, 0.0), (std::vector<double>{0.1, -0.1}));
  EXPECT_THROW(prox_group_linf(std::vector<double>{1, 1, 1}, make_sliding_windows(3, 2), 1.0),
               std::invalid_argument);
}

TEST(ProxTree, BasicCases) {
  GroupStructure one(2, {{0, 1}}, {1.0});
  std::vector<double> u{0.5, -0.1};
  EXPECT_EQ(prox_tree(u, one, 0.3, NormKind::kLinf), prox_group_linf(u, one, 0.3));
  EXPECT_EQ(prox_tree(u, one, 0.3, NormKind::kL2), prox_group_l2(u, one, 0.3));
  auto chain = make_tree({-1, 0, 1});
  std::vector<double> v{0.9, -0.4, 0.7};
  EXPECT_EQ(prox_tree(v, chain, 0.0, NormKind::kLinf), v);
  auto flow = prox_overlapping_linf(v, chain, 0.2).w;
  EXPECT_LE(fixture::max_abs_diff(prox_tree(v, chain, 0.2, NormKind::kLinf), flow), 1e-9);
  EXPECT_THROW(prox_tree(v, make_sliding_windows(3, 2), 0.2, NormKind::kLinf), std::invalid_argument);
}

TEST(ProxFlow, ZeroLambdaIsIdentity) {
  auto gs = make_sliding_windows(4, 2);
  std::vector<double> u{1, -2, 3, -4};
  auto res = prox_overlapping_linf(u, gs, 0.0);
  EXPECT_EQ(res.w, u);
  EXPECT_EQ(res.xi_bar, std::vector<double>(4, 0.0));
}

TEST(ProxFlow, SingleGroup) {
  GroupStructure gs(2, {{0, 1}}, {1.0});
  auto res = prox_overlapping_linf(std::vector<double>{0.5, 0.1}, gs, 0.3, certified());
  EXPECT_NEAR(res.w[0], 0.2, 1e-15);
  EXPECT_NEAR(res.w[1], 0.1, 1e-15);
  EXPECT_EQ(res.stats.max_flow_calls, 0u);
  ASSERT_TRUE(res.certificate);
  EXPECT_TRUE(res.certificate->passed);
}

TEST(ProxFlow, TwoOverlappingGroupsMatchOracle) {
  GroupStructure gs(3, {{0, 1}, {1, 2}}, {1.0, 1.0});
  std::vector<double> u{0.4, 0.6, 0.5};
  auto res = prox_overlapping_linf(u, gs, 0.2, certified());
  auto ref = oracle::prox_dual(u, gs, 0.2);
  ASSERT_TRUE(ref.converged);
  EXPECT_LE(fixture::max_abs_diff(res.w, ref.w), 1e-9);
  EXPECT_TRUE(res.certificate->passed);
}

TEST(ProxFlow, ZeroBelowDualNormThreshold) {
  auto gs = make_sliding_windows(5, 3);
  std::vector<double> u{0.01, -0.02, 0.01, 0.015, -0.01};
  auto res = prox_overlapping_linf(u, gs, 1.0);
  EXPECT_LE(fixture::max_abs(res.w), 1e-15);
}

TEST(ProxFlow, RejectsBadInput) {
  auto gs = make_singletons(3);
  EXPECT_THROW(prox_overlapping_linf(std::vector<double>{1, 2}, gs, 1.0), std::invalid_argument);
  EXPECT_THROW(prox_overlapping_linf(std::vector<double>{1, 2, 3}, gs, -1.0), std::invalid_argument);
  EXPECT_THROW(prox_overlapping_linf(std::vector<double>{1, NAN, 3}, gs, 1.0), std::invalid_argument);
}

TEST(ProxFlow, MatchesDualOracleOnRandomInstances) {
  fixture::Rng rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t p = fixture::uniform_index(rng, 2, 25);
    auto gs = fixture::random_groups(rng, p, fixture::uniform_index(rng, 1, 10), 6);
    auto u = fixture::random_vector(rng, p);
    const double lambda = std::pow(10.0, fixture::uniform(rng, -2.0, 0.5));
    auto res = prox_overlapping_linf(u, gs, lambda, certified());
    auto ref = oracle::prox_dual(u, gs, lambda);
    EXPECT_LE(fixture::max_abs_diff(res.w, ref.w), 1e-6) << "trial " << trial;
    EXPECT_TRUE(res.certificate->passed) << "trial " << trial;
  }
}

TEST(ProxFlow, OptionVariantsAgree) {
  fixture::Rng rng(42);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t p = fixture::uniform_index(rng, 2, 30);
    auto gs = fixture::random_groups(rng, p, fixture::uniform_index(rng, 1, 12), 6);
    auto u = fixture::random_vector(rng, p);
    const double lambda = fixture::uniform(rng, 0.05, 1.0);
    auto base = prox_overlapping_linf(u, gs, lambda).w;
    for (int mask = 1; mask < 8; ++mask) {
      ProxOptions opt;
      opt.improved_projection = mask & 1;
      opt.use_components = mask & 2;
      opt.simplify_nested = mask & 4;
      EXPECT_LE(fixture::max_abs_diff(prox_overlapping_linf(u, gs, lambda, opt).w, base), 1e-9);
    }
  }
}

TEST(ProxFlow, SingletonsMatchSoftThresholding) {
  fixture::Rng rng(43);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t p = fixture::uniform_index(rng, 1, 50);
    auto u = fixture::random_vector(rng, p);
    const double lambda = fixture::uniform(rng, 0.0, 1.5);
    EXPECT_LE(fixture::max_abs_diff(prox_overlapping_linf(u, make_singletons(p), lambda).w, prox_l1(u, lambda)),
              1e-12);
  }
}

TEST(ProxFlow, PartitionsMatchGroupThresholding) {
  fixture::Rng rng(44);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t p = fixture::uniform_index(rng, 1, 60);
    auto gs = make_partition(fixture::random_blocks(rng, p, 6), p);
    auto u = fixture::random_vector(rng, p);
    const double lambda = fixture::uniform(rng, 0.0, 2.0);
    EXPECT_LE(fixture::max_abs_diff(prox_overlapping_linf(u, gs, lambda).w, prox_group_linf(u, gs, lambda)),
              1e-9);
  }
}

TEST(ProxFlow, TreesMatchComposition) {
  fixture::Rng rng(45);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t p = fixture::uniform_index(rng, 2, 200);
    auto gs = make_tree(fixture::random_parents(rng, p));
    auto u = fixture::random_vector(rng, p);
    const double lambda = fixture::uniform(rng, 0.01, 0.5);
    auto res = prox_overlapping_linf(u, gs, lambda, certified());
    EXPECT_LE(fixture::max_abs_diff(res.w, prox_tree(u, gs, lambda, NormKind::kLinf)), 1e-9);
    EXPECT_TRUE(res.certificate->passed);
  }
}

TEST(ProxFlow, SignEquivarianceAndNonExpansiveness) {
  fixture::Rng rng(46);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t p = fixture::uniform_index(rng, 2, 25);
    auto gs = fixture::random_groups(rng, p, fixture::uniform_index(rng, 1, 10), 5);
    auto u1 = fixture::random_vector(rng, p);
    auto u2 = fixture::random_vector(rng, p);
    const double lambda = fixture::uniform(rng, 0.05, 1.0);
    auto w1 = prox_overlapping_linf(u1, gs, lambda).w;
    auto w2 = prox_overlapping_linf(u2, gs, lambda).w;
    EXPECT_LE(dist2(w1, w2), dist2(u1, u2) + 1e-9);
    std::vector<double> flipped = u1;
    std::vector<double> sign(p);
    for (std::size_t j = 0; j < p; ++j) {
      sign[j] = fixture::uniform(rng, 0, 1) < 0.5 ? -1.0 : 1.0;
      flipped[j] *= sign[j];
    }
    auto wf = prox_overlapping_linf(flipped, gs, lambda).w;
    for (std::size_t j = 0; j < p; ++j) EXPECT_NEAR(wf[j], sign[j] * w1[j], 1e-12);
  }
}

TEST(ProxFlow, CertificateDetectsWrongSolution) {
  GroupStructure gs(3, {{0, 1}, {1, 2}}, {1.0, 1.0});
  std::vector<double> u{0.4, 0.6, 0.5};
  ProxOptions opt;
  opt.keep_group_flows = true;
  auto res = prox_overlapping_linf(u, gs, 0.2, opt);
  auto good = certify_prox(u, gs, 0.2, res.w, res.group_flows);
  EXPECT_TRUE(good.passed);
  auto w = res.w;
  w[1] += 1e-3;
  EXPECT_FALSE(certify_prox(u, gs, 0.2, w, res.group_flows).passed);
}

TEST(ProxFlow, GroupFlowsSumToAggregate) {
  fixture::Rng rng(47);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t p = fixture::uniform_index(rng, 2, 30);
    auto gs = fixture::random_groups(rng, p, fixture::uniform_index(rng, 1, 12), 6);
    auto u = fixture::random_vector(rng, p);
    ProxOptions opt;
    opt.keep_group_flows = true;
    auto res = prox_overlapping_linf(u, gs, 0.3, opt);
    std::vector<double> sum(p, 0.0);
    for (std::size_t g = 0; g < gs.size(); ++g) {
      double l1 = 0.0;
      const auto members = gs.group(g);
      for (std::size_t k = 0; k < members.size(); ++k) {
        sum[members[k]] += res.group_flows[g][k];
        l1 += std::abs(res.group_flows[g][k]);
      }
      EXPECT_LE(l1, 0.3 * gs.weight(g) + 1e-9);
    }
    EXPECT_LE(fixture::max_abs_diff(sum, res.xi_bar), 1e-9);
  }
}

TEST(ComputeFlow, SingleGroupNeedsNoRecursion) {
  GroupStructure gs(3, {{0, 1, 2}}, {1.0});
  FlowGraph g = build_canonical(gs, std::vector<double>{0.3, 0.2, 0.9}, 0.5);
  auto res = compute_flow(g, {}, true);
  EXPECT_TRUE(res.splits.empty());
  EXPECT_EQ(res.stats.max_flow_calls, 0u);
}

TEST(ComputeFlow, ChainedPairFirstCut) {
  // With the plain relaxed projection, γ_3 exceeds what h can deliver and
  // the first cut separates {g,1,2} from {h,3}.
  GroupStructure gs(3, {{0, 1}, {1, 2}}, {1.0, 1.0});
  FlowGraph g = build_canonical(gs, std::vector<double>{0.2, 0.2, 2.0}, 1.0);
  ProxOptions opt;
  opt.improved_projection = false;
  auto res = compute_flow(g, opt, true);
  ASSERT_FALSE(res.splits.empty());
  const SplitRecord& first = res.splits.front();
  EXPECT_EQ(first.source_variables, (std::vector<Index>{0, 1}));
  EXPECT_EQ(first.source_groups, (std::vector<Index>{0}));
  EXPECT_EQ(first.sink_variables, (std::vector<Index>{2}));
  EXPECT_EQ(first.sink_groups, (std::vector<Index>{1}));
  auto ref = oracle::prox_dual(std::vector<double>{0.2, 0.2, 2.0}, gs, 1.0);
  EXPECT_LE(fixture::max_abs_diff(res.xi_bar, ref.xi_bar), 1e-9);
}

TEST(ComputeFlow, TwentyVariablesMatchOracle) {
  fixture::Rng rng(48);
  auto gs = fixture::random_groups(rng, 20, 8, 5);
  auto u = fixture::random_vector(rng, 20);
  for (double& x : u) x = std::abs(x);
  FlowGraph g = build_canonical(gs, u, 0.25);
  auto res = compute_flow(g);
  auto ref = oracle::prox_dual(u, gs, 0.25);
  EXPECT_LE(fixture::max_abs_diff(res.xi_bar, ref.xi_bar), 1e-7);
}

TEST(ComputeFlow, SimplifiedGraphGivesSameAggregate) {
  fixture::Rng rng(49);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t p = fixture::uniform_index(rng, 2, 60);
    auto gs = make_tree(fixture::random_parents(rng, p, 0.2));
    auto u = fixture::random_vector(rng, p);
    for (double& x : u) x = std::abs(x);
    FlowGraph canonical = build_canonical(gs, u, 0.1);
    auto a = compute_flow(canonical);
    auto b = compute_flow(simplify_nested(canonical, gs));
    EXPECT_LE(fixture::max_abs_diff(a.xi_bar, b.xi_bar), 1e-9);
  }
}

TEST(ComputeFlow, ThreadsGiveIdenticalResults) {
  fixture::Rng rng(50);
  auto gs = fixture::random_groups(rng, 200, 80, 3, true);
  auto u = fixture::random_vector(rng, 200);
  ProxOptions one, four;
  one.threads = 1;
  four.threads = 4;
  EXPECT_EQ(prox_overlapping_linf(u, gs, 0.2, one).w, prox_overlapping_linf(u, gs, 0.2, four).w);
}

TEST(ProxExact, Dispatch) {
  std::vector<double> u{0.5, -0.2, 0.9};
  auto part = make_partition({{0, 1}, {2}}, 3);
  EXPECT_EQ(prox_exact(u, part, 0.3, NormKind::kL2), prox_group_l2(u, part, 0.3));
  auto windows = make_sliding_windows(3, 2);
  EXPECT_EQ(prox_exact(u, windows, 0.3, NormKind::kLinf), prox_overlapping_linf(u, windows, 0.3).w);
  EXPECT_FALSE(has_exact_prox(windows, NormKind::kL2));
  EXPECT_THROW(prox_exact(u, windows, 0.3, NormKind::kL2), std::invalid_argument);
}
