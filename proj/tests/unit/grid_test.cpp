#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "masklink/grid.hpp"
#include "test_support.hpp"

namespace masklink {
namespace {

using geom::Box;
using geom::Geometry;
using geom::Point;
using test::square;
using Pairs = std::vector<std::pair<std::string, Geometry>>;

// Cell ix covers [ix*cs, (ix+1)*cs); a closed interval [lo, hi] reaches it
// when the two overlap.
bool reaches(double lo, double hi, int ix, double cs) { return ix * cs <= hi && lo < (ix + 1) * cs; }

std::set<std::pair<int, int>> oracle_cells(const Box& b, double cs) {
  std::set<std::pair<int, int>> out;
  const int x_lo = static_cast<int>(b.min_corner().x / cs) - 2;
  const int x_hi = static_cast<int>(b.max_corner().x / cs) + 2;
  const int y_lo = static_cast<int>(b.min_corner().y / cs) - 2;
  const int y_hi = static_cast<int>(b.max_corner().y / cs) + 2;
  for (int ix = x_lo; ix <= x_hi; ++ix) {
    for (int iy = y_lo; iy <= y_hi; ++iy) {
      if (reaches(b.min_corner().x, b.max_corner().x, ix, cs) &&
          reaches(b.min_corner().y, b.max_corner().y, iy, cs)) {
        out.insert({ix, iy});
      }
    }
  }
  return out;
}

TEST(BuildGrid, SingleCell) {
  const GridIndex g = build_grid(Pairs{{"b1", Geometry{square(0, 0, 1, 1)}}}, 10.0);
  ASSERT_EQ(g.cell_count(), 1u);
  const auto& [key, ids] = *g.cells().begin();
  EXPECT_EQ(ids.size(), 1u);
  const Box box = g.cell_box(key);
  EXPECT_DOUBLE_EQ(box.min_corner().x, 0.0);
  EXPECT_DOUBLE_EQ(box.max_corner().x, 10.0);
}

TEST(BuildGrid, CornerStraddlerLandsInFourCells) {
  const GridIndex g = build_grid(Pairs{{"b1", Geometry{square(0, 0, 1, 1)}},
                                  {"b2", Geometry{square(9, 9, 11, 11)}}},
                                 10.0);
  int cells_with_b2 = 0;
  for (const auto& [key, ids] : g.cells()) {
    cells_with_b2 += std::count(ids.begin(), ids.end(), TargetIndex{1});
  }
  EXPECT_EQ(cells_with_b2, 4);
}

TEST(BuildGrid, MembershipMatchesBoxOracle) {
  std::mt19937_64 rng(41);
  for (double cs : {1.0, 2.5, 10.0}) {
    std::vector<geom::Polygon> polys;
    for (int i = 0; i < 100; ++i) polys.push_back(test::random_rect(rng, 0, 50, 0.1, 6));
    const GridIndex g = build_grid(test::make_targets(polys), cs);

    std::map<std::pair<int, int>, std::set<TargetIndex>> want;
    for (TargetIndex i = 0; i < polys.size(); ++i) {
      for (auto c : oracle_cells(g.target(i).envelope, cs)) want[c].insert(i);
    }
    std::map<std::pair<int, int>, std::set<TargetIndex>> got;
    for (const auto& [key, ids] : g.cells()) {
      const Box b = g.cell_box(key);
      const std::pair<int, int> abs{static_cast<int>(std::lround(b.min_corner().x / cs)),
                                    static_cast<int>(std::lround(b.min_corner().y / cs))};
      got[abs].insert(ids.begin(), ids.end());
      EXPECT_TRUE(std::is_sorted(ids.begin(), ids.end()));
    }
    EXPECT_EQ(got, want) << "cell size " << cs;
  }
}

TEST(BuildGrid, SparseStorage) {
  const GridIndex g = build_grid(Pairs{{"b1", Geometry{square(0, 0, 1, 1)}},
                                  {"b2", Geometry{square(95, 95, 96, 96)}}},
                                 1.0);
  // A closed unit square on a unit grid reaches 2x2 half-open cells.
  EXPECT_EQ(g.cell_count(), 8u);
}

TEST(BuildGrid, Rejections) {
  EXPECT_THROW(build_grid(std::vector<Target>{}, 1.0), Error);
  EXPECT_THROW(build_grid(Pairs{{"b1", Geometry{square(0, 0, 1, 1)}}}, 0.0), Error);
  EXPECT_THROW(build_grid(Pairs{{"b1", Geometry{Point{0, 0}}}}, 1.0), Error);
  try {
    build_grid(std::vector<Target>{}, 1.0);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyTargetSet);
  }
}

TEST(LocateCells, Examples) {
  const GridIndex one = build_grid(Pairs{{"b1", Geometry{square(1, 1, 2, 2)}}}, 10.0);
  const auto hit = one.locate_cells(Point{5, 5});
  ASSERT_EQ(hit.size(), 1u);
  EXPECT_DOUBLE_EQ(hit[0].box.max_corner().x, 10.0);
  EXPECT_TRUE(one.locate_cells(Point{15, 5}).empty());

  const GridIndex four = build_grid(Pairs{{"b1", Geometry{square(1, 1, 2, 2)}},
                                     {"b2", Geometry{square(11, 1, 12, 2)}},
                                     {"b3", Geometry{square(1, 11, 2, 12)}},
                                     {"b4", Geometry{square(11, 11, 12, 12)}}},
                                    10.0);
  EXPECT_EQ(four.locate_cells(square(8, 8, 12, 12)).size(), 4u);
  // Grid lines belong to the cell above and to the right.
  const auto corner = four.locate_cells(Point{10, 10});
  ASSERT_EQ(corner.size(), 1u);
  EXPECT_EQ(corner[0].key, (CellKey{1, 1}));
  EXPECT_EQ(four.locate_cells(Point{5, 10}).size(), 1u);
  EXPECT_EQ(four.locate_cells(Point{9.99, 9.99}).size(), 1u);
}

TEST(LocateCells, SortedAndNearSuperset) {
  std::mt19937_64 rng(43);
  std::vector<geom::Polygon> polys;
  for (int i = 0; i < 60; ++i) polys.push_back(test::random_rect(rng, 0, 30, 0.5, 4));
  const GridIndex g = build_grid(test::make_targets(polys), 2.5);
  for (int i = 0; i < 200; ++i) {
    const Geometry a = test::random_convex(rng, {test::uniform(rng, 0, 30), test::uniform(rng, 0, 30)}, 1.0);
    const auto cells = g.locate_cells(a);
    EXPECT_TRUE(std::is_sorted(cells.begin(), cells.end(),
                               [](const Cell& x, const Cell& y) { return x.key < y.key; }));
    const auto near = g.locate_cells_near(a, 0.5);
    for (const auto& c : cells) {
      EXPECT_TRUE(std::any_of(near.begin(), near.end(), [&](const Cell& n) { return n.key == c.key; }));
    }
  }
}

TEST(Candidates, Examples) {
  const GridIndex g = build_grid(Pairs{{"B1", Geometry{square(1, 1, 12, 2)}},
                                  {"B2", Geometry{square(3, 3, 4, 4)}},
                                  {"B3", Geometry{square(13, 3, 14, 4)}}},
                                 10.0);
  EXPECT_EQ(g.candidates(Point{5, 5}), (std::vector<TargetIndex>{0, 1}));
  // Spans the two cells {B1, B2} and {B1, B3}; B1 is reported once.
  const auto both = g.candidates(square(9, 1.5, 11, 1.8));
  EXPECT_EQ(both, (std::vector<TargetIndex>{0, 1, 2}));
  EXPECT_TRUE(g.candidates(Point{50, 50}).empty());
}

TEST(Candidates, MatchBruteForceSharedCell) {
  std::mt19937_64 rng(47);
  const double cs = 2.5;
  std::vector<geom::Polygon> polys;
  for (int i = 0; i < 100; ++i) polys.push_back(test::random_rect(rng, 0, 40, 0.2, 5));
  const GridIndex g = build_grid(test::make_targets(polys), cs);
  for (int i = 0; i < 500; ++i) {
    const geom::Polygon a = test::random_rect(rng, 0, 40, 0.05, 3);
    const auto a_cells = oracle_cells(geom::envelope(a), cs);
    std::vector<TargetIndex> want;
    for (TargetIndex t = 0; t < polys.size(); ++t) {
      const auto t_cells = oracle_cells(g.target(t).envelope, cs);
      if (std::any_of(a_cells.begin(), a_cells.end(), [&](auto c) { return t_cells.contains(c); })) {
        want.push_back(t);
      }
    }
    EXPECT_EQ(g.candidates(a), want) << i;
  }
}

TEST(IntersectsBox, ExactForNonArealInput) {
  const Box box{{0, 0}, {1, 1}};
  EXPECT_TRUE(intersects_box(Point{1, 1}, box));
  EXPECT_FALSE(intersects_box(Point{1.01, 1}, box));
  // The envelope meets the box; the segment itself does not.
  EXPECT_FALSE(intersects_box(geom::PolyLine{{0.5, 2}, {2, 0.5}}, box));
  EXPECT_TRUE(intersects_box(geom::PolyLine{{-1, 0.5}, {2, 0.5}}, box));
}

}  // namespace
}  // namespace masklink
