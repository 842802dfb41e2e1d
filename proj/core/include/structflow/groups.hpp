#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace structflow {

/// Vertex and coordinate indices. Zero-based everywhere inside the library;
/// file formats and the CLI use one-based indices and convert at the boundary.
using Index = std::int32_t;

enum class NormKind { kL2, kLinf };

/// A declared containment `child ⊂ parent` between two groups (by group id).
struct NestingHint {
  Index parent = 0;
  Index child = 0;
  friend bool operator==(const NestingHint&, const NestingHint&) = default;
};

enum class GroupIssue {
  kEmptyGroup,
  kIndexOutOfRange,
  kNonPositiveWeight,
  kInvalidNesting,
  kDimensionZero,
  kSizeMismatch,
};

const char* to_string(GroupIssue issue);

class GroupStructureError : public std::invalid_argument {
 public:
  GroupStructureError(GroupIssue issue, const std::string& what)
      : std::invalid_argument(what), issue_(issue) {}
  GroupIssue issue() const { return issue_; }

 private:
  GroupIssue issue_;
};

/// Outcome of `validate`: hard errors (one per violated invariant) and
/// warnings that do not invalidate the structure.
struct ValidationReport {
  struct Entry {
    GroupIssue issue;
    std::string message;
  };
  std::vector<Entry> errors;
  std::vector<std::string> warnings;

  bool ok() const { return errors.empty(); }
};

/// The set of index groups with positive weights that defines
/// Ω(w) = Σ_g η_g ‖w_g‖. Immutable once constructed.
///
/// Groups are stored in compressed form (offsets + sorted indices); each
/// group is deduplicated and sorted on construction. Duplicate groups are
/// allowed. The inverse map (groups containing a coordinate) is built eagerly.
class GroupStructure {
 public:
  GroupStructure() = default;

  /// Throws GroupStructureError on the first violated invariant.
  GroupStructure(std::size_t dimension, const std::vector<std::vector<Index>>& groups,
                 std::vector<double> weights, std::vector<NestingHint> hints = {});

  /// Builds without checking invariants so that `validate` can report on
  /// raw input. Out-of-range indices are kept but excluded from groups_of().
  static GroupStructure unchecked(std::size_t dimension,
                                  const std::vector<std::vector<Index>>& groups,
                                  std::vector<double> weights,
                                  std::vector<NestingHint> hints = {});

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return weights_.size(); }
  bool empty() const { return weights_.empty(); }

  std::span<const Index> group(std::size_t g) const {
    return {members_.data() + offsets_[g], members_.data() + offsets_[g + 1]};
  }
  std::size_t group_size(std::size_t g) const { return offsets_[g + 1] - offsets_[g]; }
  double weight(std::size_t g) const { return weights_[g]; }
  std::span<const double> weights() const { return weights_; }
  std::span<const NestingHint> hints() const { return hints_; }

  /// Ids of the groups that contain coordinate j, ascending.
  std::span<const Index> groups_of(std::size_t j) const {
    return {inverse_.data() + inverse_offsets_[j], inverse_.data() + inverse_offsets_[j + 1]};
  }

  /// Total number of (group, member) incidences, Σ_g |g|.
  std::size_t total_members() const { return members_.size(); }

  /// True if every coordinate belongs to at most one group.
  bool is_non_overlapping() const;
  /// True if groups are non-overlapping and cover every coordinate.
  bool is_partition() const;
  /// True if any two groups are either disjoint or one contains the other.
  bool is_tree_structured() const;

  /// Strict containment pairs usable for graph simplification. Returns the
  /// declared hints if any, otherwise detects direct containments by pairwise
  /// subset tests when size() <= detection_cap, and nothing above the cap.
  std::vector<NestingHint> nesting(std::size_t detection_cap = 2000) const;

  /// Same groups with every weight multiplied by `factor` (> 0).
  GroupStructure scaled(double factor) const;

 private:
  void assign(std::size_t dimension, const std::vector<std::vector<Index>>& groups,
              std::vector<double> weights, std::vector<NestingHint> hints);

  std::size_t dimension_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<Index> members_;
  std::vector<double> weights_;
  std::vector<NestingHint> hints_;
  std::vector<std::size_t> inverse_offsets_{0};
  std::vector<Index> inverse_;
};

/// Checks every invariant and reports all violations; never throws.
ValidationReport validate(const GroupStructure& gs);

/// True if the sorted index range `inner` is a subset of sorted `outer`.
bool is_subset(std::span<const Index> inner, std::span<const Index> outer);

// Builders. All produce unit weights unless stated otherwise.

/// p singleton groups {0},...,{p-1}: Ω becomes the ℓ1-norm.
GroupStructure make_singletons(std::size_t p);

/// Disjoint blocks covering {0..p-1}; throws on overlap or on a gap.
GroupStructure make_partition(const std::vector<std::vector<Index>>& blocks, std::size_t p);

/// p - width + 1 windows of consecutive indices.
GroupStructure make_sliding_windows(std::size_t p, std::size_t width);

/// One group per k×k neighbourhood of an h×w grid in row-major order.
/// With `cyclic`, neighbourhoods wrap around both borders (h·w groups).
GroupStructure make_grid_squares(std::size_t h, std::size_t w, std::size_t k, bool cyclic);

/// Forest given by parent[j] (-1 for roots). Group of node j is j together
/// with all its descendants; nesting hints follow the parent edges.
GroupStructure make_tree(const std::vector<Index>& parent);

}  // namespace structflow
