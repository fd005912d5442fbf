#pragma once

// Recursive uniform subdivision of the training index set. Regions are
// contiguous, balanced blocks; a branch stops splitting once its regions
// would become empty, so level j holds min(q^j, n) regions.

#include <optional>
#include <vector>

#include "mrgp/types.hpp"

namespace mrgp {

struct IndexRange {
  Index lo = 0;  // inclusive
  Index hi = 0;  // exclusive
  Index size() const { return hi - lo; }
};

struct PartitionTree {
  Index n = 0;
  int m = 0;
  int q = 2;
  // levels[j] = ordered regions at resolution j; levels[0] is {0..n}.
  std::vector<std::vector<IndexRange>> levels;

  Index num_regions(int level) const { return static_cast<Index>(levels[level].size()); }
  // Region index at `level` containing sample t.
  Index region_of(int level, Index t) const;
};

PartitionTree build_partition(Index n, int m, int q);

// Axis-aligned bounding boxes of the training inputs, one per region.
struct RegionBox {
  Vector lo;
  Vector hi;
  bool contains(const Eigen::Ref<const Vector>& x) const;
};

using LevelBoxes = std::vector<std::vector<RegionBox>>;

LevelBoxes region_boxes(const PartitionTree& tree, const Eigen::Ref<const Matrix>& x);

// Unique region whose box contains x_star, or nothing when x_star lies in no
// box or in more than one (ambiguity forces the root-only prediction path).
std::optional<Index> locate_region(const std::vector<RegionBox>& boxes,
                                   const Eigen::Ref<const Vector>& x_star);

}  // namespace mrgp
