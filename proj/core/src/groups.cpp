#include "structflow/groups.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <utility>

namespace structflow {

const char* to_string(GroupIssue issue) {
  switch (issue) {
    case GroupIssue::kEmptyGroup: return "empty_group";
    case GroupIssue::kIndexOutOfRange: return "index_out_of_range";
    case GroupIssue::kNonPositiveWeight: return "non_positive_weight";
    case GroupIssue::kInvalidNesting: return "invalid_nesting";
    case GroupIssue::kDimensionZero: return "dimension_zero";
    case GroupIssue::kSizeMismatch: return "size_mismatch";
  }
  return "unknown";
}

bool is_subset(std::span<const Index> inner, std::span<const Index> outer) {
  if (inner.size() > outer.size()) return false;
  return std::includes(outer.begin(), outer.end(), inner.begin(), inner.end());
}

void GroupStructure::assign(std::size_t dimension, const std::vector<std::vector<Index>>& groups,
                            std::vector<double> weights, std::vector<NestingHint> hints) {
  dimension_ = dimension;
  weights_ = std::move(weights);
  hints_ = std::move(hints);
  offsets_.assign(1, 0);
  members_.clear();
  std::size_t total = 0;
  for (const auto& g : groups) total += g.size();
  members_.reserve(total);
  offsets_.reserve(groups.size() + 1);
  for (const auto& g : groups) {
    const std::size_t begin = members_.size();
    members_.insert(members_.end(), g.begin(), g.end());
    auto first = members_.begin() + static_cast<std::ptrdiff_t>(begin);
    std::sort(first, members_.end());
    members_.erase(std::unique(first, members_.end()), members_.end());
    offsets_.push_back(members_.size());
  }

  inverse_offsets_.assign(dimension_ + 1, 0);
  for (Index j : members_) {
    if (j >= 0 && static_cast<std::size_t>(j) < dimension_) ++inverse_offsets_[j + 1];
  }
  std::partial_sum(inverse_offsets_.begin(), inverse_offsets_.end(), inverse_offsets_.begin());
  inverse_.assign(inverse_offsets_.back(), 0);
  std::vector<std::size_t> cursor(inverse_offsets_.begin(), inverse_offsets_.end() - 1);
  for (std::size_t g = 0; g + 1 < offsets_.size(); ++g) {
    for (std::size_t k = offsets_[g]; k < offsets_[g + 1]; ++k) {
      const Index j = members_[k];
      if (j >= 0 && static_cast<std::size_t>(j) < dimension_) {
        inverse_[cursor[j]++] = static_cast<Index>(g);
      }
    }
  }
}

GroupStructure GroupStructure::unchecked(std::size_t dimension,
                                         const std::vector<std::vector<Index>>& groups,
                                         std::vector<double> weights,
                                         std::vector<NestingHint> hints) {
  GroupStructure gs;
  gs.assign(dimension, groups, std::move(weights), std::move(hints));
  return gs;
}

GroupStructure::GroupStructure(std::size_t dimension,
                               const std::vector<std::vector<Index>>& groups,
                               std::vector<double> weights, std::vector<NestingHint> hints) {
  assign(dimension, groups, std::move(weights), std::move(hints));
  const ValidationReport report = validate(*this);
  if (!report.ok()) {
    throw GroupStructureError(report.errors.front().issue, report.errors.front().message);
  }
}

ValidationReport validate(const GroupStructure& gs) {
  ValidationReport report;
  auto error = [&](GroupIssue issue, const std::string& msg) {
    report.errors.push_back({issue, std::string(to_string(issue)) + ": " + msg});
  };
  if (gs.dimension() == 0) error(GroupIssue::kDimensionZero, "dimension p must be >= 1");

  bool empty_reported = false;
  bool range_reported = false;
  bool weight_reported = false;
  for (std::size_t g = 0; g < gs.size(); ++g) {
    const auto members = gs.group(g);
    if (members.empty() && !empty_reported) {
      error(GroupIssue::kEmptyGroup, "group " + std::to_string(g + 1) + " has no indices");
      empty_reported = true;
    }
    if (!range_reported && !members.empty() &&
        (members.front() < 0 || static_cast<std::size_t>(members.back()) >= gs.dimension())) {
      error(GroupIssue::kIndexOutOfRange,
            "group " + std::to_string(g + 1) + " has an index outside 1.." +
                std::to_string(gs.dimension()));
      range_reported = true;
    }
    if (!weight_reported && !(gs.weight(g) > 0.0)) {
      std::ostringstream os;
      os << "group " << g + 1 << " has weight " << gs.weight(g);
      error(GroupIssue::kNonPositiveWeight, os.str());
      weight_reported = true;
    }
  }

  for (const NestingHint& hint : gs.hints()) {
    const auto n = static_cast<Index>(gs.size());
    if (hint.parent < 0 || hint.parent >= n || hint.child < 0 || hint.child >= n ||
        gs.group_size(hint.child) >= gs.group_size(hint.parent) ||
        !is_subset(gs.group(hint.child), gs.group(hint.parent))) {
      error(GroupIssue::kInvalidNesting, "declared nesting " + std::to_string(hint.child + 1) +
                                             " in " + std::to_string(hint.parent + 1) +
                                             " is not a strict containment");
      break;
    }
  }

  // Duplicate groups are legal (their weights simply add up in Ω).
  if (report.errors.empty() && gs.size() > 1) {
    std::vector<std::size_t> order(gs.size());
    std::iota(order.begin(), order.end(), 0);
    auto key_less = [&](std::size_t a, std::size_t b) {
      auto ga = gs.group(a);
      auto gb = gs.group(b);
      return std::lexicographical_compare(ga.begin(), ga.end(), gb.begin(), gb.end());
    };
    std::sort(order.begin(), order.end(), key_less);
    for (std::size_t k = 1; k < order.size(); ++k) {
      auto ga = gs.group(order[k - 1]);
      auto gb = gs.group(order[k]);
      if (std::equal(ga.begin(), ga.end(), gb.begin(), gb.end())) {
        report.warnings.push_back("duplicate groups " + std::to_string(order[k - 1] + 1) +
                                  " and " + std::to_string(order[k] + 1));
      }
    }
  }
  return report;
}

bool GroupStructure::is_non_overlapping() const {
  for (std::size_t j = 0; j < dimension_; ++j) {
    if (groups_of(j).size() > 1) return false;
  }
  return true;
}

bool GroupStructure::is_partition() const {
  for (std::size_t j = 0; j < dimension_; ++j) {
    if (groups_of(j).size() != 1) return false;
  }
  return true;
}

bool GroupStructure::is_tree_structured() const {
  // Tree-structured iff, for every coordinate, the groups containing it form
  // a chain under inclusion. Checking consecutive links of each chain is enough.
  std::vector<std::pair<Index, Index>> links;
  std::vector<Index> chain;
  for (std::size_t j = 0; j < dimension_; ++j) {
    const auto owners = groups_of(j);
    if (owners.size() < 2) continue;
    chain.assign(owners.begin(), owners.end());
    std::sort(chain.begin(), chain.end(), [&](Index a, Index b) {
      const auto sa = group_size(a), sb = group_size(b);
      return sa != sb ? sa < sb : a < b;
    });
    for (std::size_t k = 1; k < chain.size(); ++k) links.emplace_back(chain[k - 1], chain[k]);
  }
  std::sort(links.begin(), links.end());
  links.erase(std::unique(links.begin(), links.end()), links.end());
  for (const auto& [small, large] : links) {
    if (!is_subset(group(small), group(large))) return false;
  }
  return true;
}

std::vector<NestingHint> GroupStructure::nesting(std::size_t detection_cap) const {
  if (!hints_.empty()) return hints_;
  std::vector<NestingHint> out;
  if (size() > detection_cap) return out;

  // For each group h, find strict supersets through the owners of h's first
  // index, then keep only the minimal ones (direct containments).
  std::vector<Index> supersets;
  for (std::size_t h = 0; h < size(); ++h) {
    const auto members = group(h);
    if (members.empty()) continue;
    supersets.clear();
    for (Index g : groups_of(members.front())) {
      if (group_size(g) > members.size() && is_subset(members, group(g))) supersets.push_back(g);
    }
    for (Index g : supersets) {
      bool direct = true;
      for (Index c : supersets) {
        if (c != g && group_size(c) < group_size(g) && is_subset(group(c), group(g))) {
          direct = false;
          break;
        }
      }
      if (direct) out.push_back({g, static_cast<Index>(h)});
    }
  }
  return out;
}

GroupStructure GroupStructure::scaled(double factor) const {
  GroupStructure copy = *this;
  for (double& w : copy.weights_) w *= factor;
  return copy;
}

GroupStructure make_singletons(std::size_t p) {
  if (p == 0) throw GroupStructureError(GroupIssue::kDimensionZero, "make_singletons: p must be >= 1");
  std::vector<std::vector<Index>> groups(p);
  for (std::size_t j = 0; j < p; ++j) groups[j] = {static_cast<Index>(j)};
  return GroupStructure(p, groups, std::vector<double>(p, 1.0));
}

GroupStructure make_partition(const std::vector<std::vector<Index>>& blocks, std::size_t p) {
  std::vector<int> seen(p, 0);
  for (const auto& block : blocks) {
    for (Index j : block) {
      if (j < 0 || static_cast<std::size_t>(j) >= p) {
        throw GroupStructureError(GroupIssue::kIndexOutOfRange,
                                  "make_partition: index " + std::to_string(j + 1) + " outside 1.." +
                                      std::to_string(p));
      }
      if (seen[j]++) {
        throw std::invalid_argument("make_partition: overlap at index " + std::to_string(j + 1));
      }
    }
  }
  for (std::size_t j = 0; j < p; ++j) {
    if (!seen[j]) {
      throw std::invalid_argument("make_partition: index " + std::to_string(j + 1) + " uncovered");
    }
  }
  return GroupStructure(p, blocks, std::vector<double>(blocks.size(), 1.0));
}

GroupStructure make_sliding_windows(std::size_t p, std::size_t width) {
  if (width < 1 || width > p) {
    throw std::invalid_argument("make_sliding_windows: width must lie in [1, p]");
  }
  std::vector<std::vector<Index>> groups(p - width + 1);
  for (std::size_t start = 0; start < groups.size(); ++start) {
    groups[start].resize(width);
    std::iota(groups[start].begin(), groups[start].end(), static_cast<Index>(start));
  }
  return GroupStructure(p, groups, std::vector<double>(groups.size(), 1.0));
}

GroupStructure make_grid_squares(std::size_t h, std::size_t w, std::size_t k, bool cyclic) {
  if (h == 0 || w == 0) throw std::invalid_argument("make_grid_squares: empty grid");
  if (k < 1 || k > std::min(h, w)) {
    throw std::invalid_argument("make_grid_squares: k must lie in [1, min(h, w)]");
  }
  const std::size_t rows = cyclic ? h : h - k + 1;
  const std::size_t cols = cyclic ? w : w - k + 1;
  std::vector<std::vector<Index>> groups;
  groups.reserve(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      std::vector<Index> g;
      g.reserve(k * k);
      for (std::size_t dr = 0; dr < k; ++dr) {
        for (std::size_t dc = 0; dc < k; ++dc) {
          const std::size_t rr = (r + dr) % h;
          const std::size_t cc = (c + dc) % w;
          g.push_back(static_cast<Index>(rr * w + cc));
        }
      }
      groups.push_back(std::move(g));
    }
  }
  return GroupStructure(h * w, groups, std::vector<double>(groups.size(), 1.0));
}

GroupStructure make_tree(const std::vector<Index>& parent) {
  const std::size_t p = parent.size();
  if (p == 0) throw GroupStructureError(GroupIssue::kDimensionZero, "make_tree: empty forest");
  for (std::size_t j = 0; j < p; ++j) {
    if (parent[j] < -1 || parent[j] >= static_cast<Index>(p)) {
      throw std::invalid_argument("make_tree: parent of node " + std::to_string(j + 1) +
                                  " out of range");
    }
  }
  // 0 = unvisited, 1 = on current path, 2 = reaches a root.
  std::vector<char> state(p, 0);
  std::vector<Index> path;
  for (std::size_t start = 0; start < p; ++start) {
    Index v = static_cast<Index>(start);
    path.clear();
    while (v != -1 && state[v] == 0) {
      state[v] = 1;
      path.push_back(v);
      v = parent[v];
    }
    if (v != -1 && state[v] == 1) {
      throw std::invalid_argument("make_tree: cycle through node " + std::to_string(v + 1));
    }
    for (Index u : path) state[u] = 2;
  }

  std::vector<std::vector<Index>> groups(p);
  for (std::size_t j = 0; j < p; ++j) {
    for (Index v = static_cast<Index>(j); v != -1; v = parent[v]) groups[v].push_back(static_cast<Index>(j));
  }
  std::vector<NestingHint> hints;
  for (std::size_t j = 0; j < p; ++j) {
    if (parent[j] != -1) hints.push_back({parent[j], static_cast<Index>(j)});
  }
  return GroupStructure(p, groups, std::vector<double>(p, 1.0), std::move(hints));
}

}  // namespace structflow
