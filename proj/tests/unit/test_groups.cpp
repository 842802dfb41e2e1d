#include <gtest/gtest.h>

#include <cmath>

#include "instances.hpp"
#include "oracles.hpp"
#include "structflow/groups.hpp"

using namespace structflow;

namespace {

std::vector<Index> members(const GroupStructure& gs, std::size_t g) {
  auto m = gs.group(g);
  return {m.begin(), m.end()};
}

}  // namespace

TEST(Builders, Singletons) {
  GroupStructure gs = make_singletons(3);
  ASSERT_EQ(gs.size(), 3u);
  for (std::size_t g = 0; g < 3; ++g) {
    EXPECT_EQ(members(gs, g), std::vector<Index>{static_cast<Index>(g)});
    EXPECT_EQ(gs.weight(g), 1.0);
  }
  EXPECT_EQ(make_singletons(1).size(), 1u);
  EXPECT_DOUBLE_EQ(oracle::omega_linf(std::vector<double>{1, -2, 3}, gs), 6.0);
  EXPECT_THROW(make_singletons(0), std::invalid_argument);
}

TEST(Builders, Partition) {
  GroupStructure gs = make_partition({{0, 1}, {2}}, 3);
  EXPECT_EQ(gs.size(), 2u);
  EXPECT_TRUE(gs.is_partition());
  EXPECT_THROW(make_partition({{0}, {0, 1}}, 2), std::invalid_argument);
  EXPECT_THROW(make_partition({{0, 1}}, 3), std::invalid_argument);
}

TEST(Builders, SlidingWindows) {
  GroupStructure gs = make_sliding_windows(5, 3);
  ASSERT_EQ(gs.size(), 3u);
  EXPECT_EQ(members(gs, 0), (std::vector<Index>{0, 1, 2}));
  EXPECT_EQ(members(gs, 2), (std::vector<Index>{2, 3, 4}));
  EXPECT_EQ(make_sliding_windows(3, 3).size(), 1u);
  EXPECT_EQ(make_sliding_windows(4, 1).size(), 4u);
  EXPECT_THROW(make_sliding_windows(3, 4), std::invalid_argument);
  EXPECT_THROW(make_sliding_windows(3, 0), std::invalid_argument);
}

TEST(Builders, GridSquares) {
  EXPECT_EQ(make_grid_squares(3, 3, 3, false).size(), 1u);
  EXPECT_EQ(make_grid_squares(3, 3, 3, false).group_size(0), 9u);
  EXPECT_EQ(make_grid_squares(4, 4, 3, false).size(), 4u);
  GroupStructure cyc = make_grid_squares(3, 3, 2, true);
  ASSERT_EQ(cyc.size(), 9u);
  for (std::size_t g = 0; g < 9; ++g) EXPECT_EQ(cyc.group_size(g), 4u);
  // Top-left square anchored at the last row and column wraps to {8,6,2,0}.
  EXPECT_EQ(members(cyc, 8), (std::vector<Index>{0, 2, 6, 8}));
  EXPECT_THROW(make_grid_squares(2, 3, 3, false), std::invalid_argument);
}

TEST(Builders, Tree) {
  GroupStructure chain = make_tree({-1, 0, 1});
  ASSERT_EQ(chain.size(), 3u);
  EXPECT_EQ(members(chain, 0), (std::vector<Index>{0, 1, 2}));
  EXPECT_EQ(members(chain, 1), (std::vector<Index>{1, 2}));
  EXPECT_EQ(members(chain, 2), (std::vector<Index>{2}));
  EXPECT_EQ(chain.hints().size(), 2u);
  EXPECT_TRUE(chain.is_tree_structured());

  GroupStructure roots = make_tree({-1, -1, -1});
  EXPECT_EQ(roots.size(), 3u);
  EXPECT_TRUE(roots.is_partition());
  EXPECT_THROW(make_tree({1, 2, 0}), std::invalid_argument);
}

TEST(Validate, ReportsEachViolation) {
  EXPECT_TRUE(validate(make_sliding_windows(6, 2)).ok());
  auto empty = GroupStructure::unchecked(3, {{0}, {}}, {1.0, 1.0});
  auto report = validate(empty);
  ASSERT_FALSE(report.ok());
  EXPECT_EQ(report.errors.front().issue, GroupIssue::kEmptyGroup);

  auto zero = GroupStructure::unchecked(2, {{0, 1}}, {0.0});
  report = validate(zero);
  ASSERT_FALSE(report.ok());
  EXPECT_EQ(report.errors.front().issue, GroupIssue::kNonPositiveWeight);

  auto range = GroupStructure::unchecked(2, {{0, 5}}, {1.0});
  EXPECT_EQ(validate(range).errors.front().issue, GroupIssue::kIndexOutOfRange);

  auto bad_hint = GroupStructure::unchecked(3, {{0}, {1, 2}}, {1.0, 1.0}, {{0, 1}});
  EXPECT_EQ(validate(bad_hint).errors.front().issue, GroupIssue::kInvalidNesting);
  EXPECT_THROW(GroupStructure(3, {{0}, {1, 2}}, {1.0, 1.0}, {{0, 1}}), std::invalid_argument);
}

TEST(Validate, DuplicateGroupsWarnOnly) {
  GroupStructure gs(2, {{0, 1}, {1, 0}}, {1.0, 1.0});
  auto report = validate(gs);
  EXPECT_TRUE(report.ok());
  EXPECT_FALSE(report.warnings.empty());
}

TEST(Properties, OmegaInvariantUnderGroupPermutation) {
  fixture::Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    GroupStructure gs = fixture::random_groups(rng, 12, 6, 5);
    std::vector<std::vector<Index>> groups;
    std::vector<double> weights;
    for (std::size_t g = gs.size(); g-- > 0;) {
      groups.push_back(members(gs, g));
      weights.push_back(gs.weight(g));
    }
    GroupStructure reversed(12, groups, weights);
    auto w = fixture::random_vector(rng, 12);
    EXPECT_NEAR(oracle::omega_linf(w, gs), oracle::omega_linf(w, reversed), 1e-12);
  }
}

TEST(Properties, TreeGroupsAreNestedOrDisjoint) {
  fixture::Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    GroupStructure gs = make_tree(fixture::random_parents(rng, 25));
    for (std::size_t a = 0; a < gs.size(); ++a) {
      for (std::size_t b = 0; b < gs.size(); ++b) {
        auto ga = gs.group(a), gb = gs.group(b);
        std::vector<Index> common;
        std::set_intersection(ga.begin(), ga.end(), gb.begin(), gb.end(), std::back_inserter(common));
        EXPECT_TRUE(common.empty() || is_subset(ga, gb) || is_subset(gb, ga));
      }
    }
  }
}

TEST(Properties, WidthOneWindowsMatchSingletons) {
  fixture::Rng rng(13);
  auto a = make_sliding_windows(9, 1);
  auto b = make_singletons(9);
  for (int trial = 0; trial < 10; ++trial) {
    auto w = fixture::random_vector(rng, 9);
    EXPECT_DOUBLE_EQ(oracle::omega_linf(w, a), oracle::omega_linf(w, b));
  }
}

TEST(Nesting, DetectsDirectContainment) {
  GroupStructure gs(3, {{0, 1, 2}, {1, 2}, {2}}, {1, 1, 1});
  auto hints = gs.nesting();
  ASSERT_EQ(hints.size(), 2u);
  EXPECT_EQ(hints[0].parent, 0);
  EXPECT_EQ(hints[0].child, 1);
  EXPECT_EQ(hints[1].parent, 1);
  EXPECT_EQ(hints[1].child, 2);
  EXPECT_TRUE(gs.nesting(2).empty());  // above the detection cap
  EXPECT_TRUE(make_sliding_windows(6, 3).nesting().empty());
}
