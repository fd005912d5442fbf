#include <doctest.h>

#include <random>
#include <set>

#include "mrgp/errors.hpp"
#include "mrgp/partition.hpp"

using namespace mrgp;

namespace {

void check_invariants(const PartitionTree& tree) {
  REQUIRE(tree.levels[0].size() == 1);
  CHECK(tree.levels[0][0].lo == 0);
  CHECK(tree.levels[0][0].hi == tree.n);

  for (int j = 0; j <= tree.m; ++j) {
    const auto& level = tree.levels[j];
    // exactly min(q^j, n) regions, none empty, disjoint cover in order
    double expect = 1;
    for (int e = 0; e < j; ++e) expect *= tree.q;
    CHECK(static_cast<double>(level.size()) ==
          std::min(expect, static_cast<double>(tree.n)));
    Index cursor = 0;
    Index min_size = tree.n, max_size = 0;
    for (const auto& r : level) {
      CHECK(r.lo == cursor);
      CHECK(r.size() > 0);
      cursor = r.hi;
      min_size = std::min(min_size, r.size());
      max_size = std::max(max_size, r.size());
    }
    CHECK(cursor == tree.n);
    CHECK(max_size - min_size <= 1);  // balanced split

    if (j > 0) {
      for (const auto& r : level) {
        // nested in exactly one parent
        int parents = 0;
        for (const auto& parent : tree.levels[j - 1])
          if (parent.lo <= r.lo && r.hi <= parent.hi) ++parents;
        CHECK(parents == 1);
      }
    }
  }
}

}  // namespace

TEST_SUITE_BEGIN("partition");

TEST_CASE("spec examples") {
  const auto t1 = build_partition(8, 2, 2);
  CHECK(t1.levels[0].size() == 1);
  CHECK(t1.levels[1].size() == 2);
  CHECK(t1.levels[2].size() == 4);
  for (int l = 0; l < 4; ++l) {
    CHECK(t1.levels[2][l].lo == 2 * l);
    CHECK(t1.levels[2][l].hi == 2 * l + 2);
  }

  const auto t2 = build_partition(5, 0, 2);
  CHECK(t2.levels[0].size() == 1);
  CHECK(t2.levels[0][0].size() == 5);

  const auto t3 = build_partition(32, 5, 2);
  CHECK(t3.levels[5].size() == 32);
  for (const auto& r : t3.levels[5]) CHECK(r.size() == 1);
}

TEST_CASE("rejects invalid arguments") {
  CHECK_THROWS_AS(build_partition(0, 1, 2), DataError);
  CHECK_THROWS_AS(build_partition(4, 1, 1), DataError);
  CHECK_THROWS_AS(build_partition(4, -1, 2), DataError);
}

TEST_CASE("invariants on random shapes, including capped trees") {
  std::mt19937_64 eng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const Index n = 1 + static_cast<Index>(eng() % 200);
    const int q = 2 + static_cast<int>(eng() % 4);
    int m = static_cast<int>(eng() % 6);
    // keep q^m <= 4n as in the stated property range
    double size = 1;
    while (m > 0) {
      size = 1;
      for (int e = 0; e < m; ++e) size *= q;
      if (size <= 4.0 * static_cast<double>(n)) break;
      --m;
    }
    check_invariants(build_partition(n, m, q));
  }
}

TEST_CASE("round trip: every index maps to exactly one region per level") {
  const auto tree = build_partition(1000, 4, 3);
  for (int j = 0; j <= tree.m; ++j) {
    for (Index t = 0; t < tree.n; ++t) {
      const Index l = tree.region_of(j, t);
      REQUIRE(l < tree.num_regions(j));
      CHECK(tree.levels[j][l].lo <= t);
      CHECK(t < tree.levels[j][l].hi);
    }
  }
}

TEST_CASE("locate_region on sorted 1-D inputs") {
  Matrix x(8, 1);
  for (int t = 0; t < 8; ++t) x(t, 0) = t + 1;  // 1..8
  const auto tree = build_partition(8, 2, 2);
  const auto boxes = region_boxes(tree, x);

  Vector q(1);
  q << 3.5;
  auto hit = locate_region(boxes[2], q);
  REQUIRE(hit.has_value());
  CHECK(*hit == 1);  // region {3,4}

  q << 100.0;  // outside all training ranges
  CHECK(!locate_region(boxes[2], q).has_value());
  q << 2.5;  // gap between boxes [1,2] and [3,4]
  CHECK(!locate_region(boxes[2], q).has_value());
}

TEST_CASE("overlapping boxes yield no region") {
  // unsorted 2-D inputs produce overlapping level-1 boxes
  Matrix x(4, 2);
  x << 0, 0, 5, 5, 1, 1, 4, 4;
  const auto tree = build_partition(4, 1, 2);
  const auto boxes = region_boxes(tree, x);
  Vector q(2);
  q << 2.5, 2.5;
  CHECK(boxes[1][0].contains(q));
  CHECK(boxes[1][1].contains(q));
  CHECK(!locate_region(boxes[1], q).has_value());
}

TEST_SUITE_END();
