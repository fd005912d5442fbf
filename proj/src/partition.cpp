#include "mrgp/partition.hpp"

#include <algorithm>

#include "mrgp/errors.hpp"

namespace mrgp {

Index PartitionTree::region_of(int level, Index t) const {
  const auto& regs = levels[level];
  auto it = std::upper_bound(regs.begin(), regs.end(), t,
                             [](Index v, const IndexRange& r) { return v < r.hi; });
  return static_cast<Index>(it - regs.begin());
}

PartitionTree build_partition(Index n, int m, int q) {
  if (n < 1) throw DataError("partition: need at least one sample");
  if (m < 0) throw DataError("partition: resolution must be nonnegative");
  if (q < 2) throw DataError("partition: subdivision factor must be at least 2");

  PartitionTree tree;
  tree.n = n;
  tree.m = m;
  tree.q = q;
  tree.levels.resize(m + 1);
  tree.levels[0] = {IndexRange{0, n}};

  for (int j = 1; j <= m; ++j) {
    auto& level = tree.levels[j];
    for (const IndexRange& parent : tree.levels[j - 1]) {
      const Index size = parent.size();
      const Index base = size / q;
      const Index extra = size % q;  // earlier regions get the extra sample
      Index lo = parent.lo;
      for (int c = 0; c < q; ++c) {
        const Index len = base + (c < extra ? 1 : 0);
        if (len == 0) break;  // exhausted branch stops splitting
        level.push_back(IndexRange{lo, lo + len});
        lo += len;
      }
    }
  }
  return tree;
}

bool RegionBox::contains(const Eigen::Ref<const Vector>& x) const {
  for (Index d = 0; d < x.size(); ++d)
    if (x[d] < lo[d] || x[d] > hi[d]) return false;
  return true;
}

LevelBoxes region_boxes(const PartitionTree& tree, const Eigen::Ref<const Matrix>& x) {
  LevelBoxes boxes(tree.levels.size());
  for (std::size_t j = 0; j < tree.levels.size(); ++j) {
    boxes[j].reserve(tree.levels[j].size());
    for (const IndexRange& r : tree.levels[j]) {
      RegionBox box;
      box.lo = x.middleRows(r.lo, r.size()).colwise().minCoeff().transpose();
      box.hi = x.middleRows(r.lo, r.size()).colwise().maxCoeff().transpose();
      boxes[j].push_back(std::move(box));
    }
  }
  return boxes;
}

std::optional<Index> locate_region(const std::vector<RegionBox>& boxes,
                                   const Eigen::Ref<const Vector>& x_star) {
  std::optional<Index> hit;
  for (std::size_t l = 0; l < boxes.size(); ++l) {
    if (boxes[l].contains(x_star)) {
      if (hit) return std::nullopt;  // overlapping boxes: ambiguous
      hit = static_cast<Index>(l);
    }
  }
  return hit;
}

}  // namespace mrgp
