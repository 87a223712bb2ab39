#include <gtest/gtest.h>

#include <random>

#include "masklink/mask.hpp"
#include "masklink/wkt.hpp"
#include "test_support.hpp"

namespace masklink {
namespace {

using geom::Box;
using geom::Geometry;
using geom::Point;
using test::square;

const Cell kCell{CellKey{0, 0}, Box{{0, 0}, {10, 10}}};
const double kPointBuffer = 0.5 * 32 * std::sin(2 * std::numbers::pi / 32);

std::vector<Geometry> geoms(std::initializer_list<geom::Polygon> polys) {
  return std::vector<Geometry>(polys.begin(), polys.end());
}

TEST(ComputeMask, Examples) {
  EXPECT_NEAR(geom::area(compute_mask(kCell, geoms({square(2, 2, 4, 4)})).geometry()), 96.0, 1e-12);
  const CellMask none = compute_mask(kCell, {});
  EXPECT_NEAR(geom::area(none.geometry()), 100.0, 1e-12);
  EXPECT_TRUE(none.covered.empty());
  const CellMask full = compute_mask(kCell, geoms({square(-1, -1, 11, 11)}));
  EXPECT_TRUE(full.empty());
  EXPECT_EQ(geom::area(full.geometry()), 0.0);
}

TEST(ComputeMask, OverlappingTargetsMatchRasterUnion) {
  const auto targets = geoms({test::ring_polygon({{1, 1}, {5, 1}, {5, 4}, {1, 4}}),
                              test::ring_polygon({{3, 2}, {7, 2}, {6, 6}}),
                              test::ring_polygon({{4, 5}, {9, 5}, {9, 9}, {4, 9}}),
                              test::ring_polygon({{2, 3}, {4, 3}, {4, 8}, {2, 8}}),
                              test::ring_polygon({{6, 0.5}, {9.5, 0.5}, {9.5, 7}})});
  const double covered = test::sampled_area(kCell.box, 2000, [&](Point p) {
    for (const auto& t : targets) {
      if (test::contains(t, p)) return true;
    }
    return false;
  });
  const CellMask m = compute_mask(kCell, targets);
  EXPECT_NEAR(geom::area(m.geometry()), 100.0 - covered, 0.02);
}

TEST(ComputeMask, PartitionInvariant) {
  std::mt19937_64 rng(53);
  for (int round = 0; round < 30; ++round) {
    std::vector<Geometry> targets;
    std::vector<geom::Polygon> stars;
    std::vector<Point> centres;
    const int n = 1 + static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i) {
      const Point c{test::uniform(rng, -2, 12), test::uniform(rng, -2, 12)};
      centres.push_back(c);
      stars.push_back(test::random_star(rng, c, test::uniform(rng, 1, 5)));
      targets.push_back(stars.back());
    }
    const CellMask m = compute_mask(kCell, targets);
    const auto inside = geom::intersection(geom::Geometry{geom::union_all(targets)},
                                           Geometry{geom::to_polygon(kCell.box)});
    EXPECT_NEAR((geom::area(m.geometry()) + geom::area(inside)) / 100.0, 1.0, 1e-6);
    for (int i = 0; i < n; ++i) {
      EXPECT_LE(test::star_overlap_area(Geometry{m.geometry()}, stars[i], centres[i]),
                test::sliver_allowance(targets[i], 10.0));
    }
  }
}

TEST(ComputeMask, ShrinksAsTargetsAreAdded) {
  std::mt19937_64 rng(59);
  std::vector<Geometry> targets;
  double previous = 100.0;
  for (int i = 0; i < 10; ++i) {
    targets.push_back(test::random_star(rng, {test::uniform(rng, 0, 10), test::uniform(rng, 0, 10)}, 2.0));
    const double now = geom::area(compute_mask(kCell, targets).geometry());
    EXPECT_LE(now, previous + 1e-9);
    previous = now;
  }
}

TEST(BufferedMask, Examples) {
  const CellMask m = compute_buffered_mask(kCell, geoms({square(4, 4, 6, 6)}), 1.0);
  EXPECT_NEAR(geom::area(m.geometry()), 100.0 - (4 + 8 + kPointBuffer), 1e-4);
  EXPECT_NEAR(geom::area(m.geometry()), 84.8786, 1e-4);

  const auto plain = compute_mask(kCell, geoms({square(2, 2, 4, 4)}));
  const auto tiny = compute_buffered_mask(kCell, geoms({square(2, 2, 4, 4)}), 1e-9);
  EXPECT_NEAR(geom::area(tiny.geometry()), geom::area(plain.geometry()), 1e-6);

  EXPECT_TRUE(compute_buffered_mask(kCell, geoms({square(1, 1, 9, 9)}), 2.0).empty());
  EXPECT_THROW(compute_buffered_mask(kCell, geoms({square(1, 1, 9, 9)}), 0.0), Error);
}

TEST(BufferedMask, ClearanceCoversChordError) {
  const CellMask m = compute_buffered_mask(kCell, geoms({square(4, 4, 6, 6)}), 0.5);
  EXPECT_GE(m.clearance, geom::buffer_chord_error(0.5));
  EXPECT_EQ(compute_mask(kCell, {}).clearance, geom::kEpsilon);
}

TEST(MaskEncloses, OnlyFiltersPointsClearOfEveryTarget) {
  std::mt19937_64 rng(61);
  for (int round = 0; round < 20; ++round) {
    std::vector<Geometry> targets;
    for (int i = 0; i < 4; ++i) {
      targets.push_back(test::random_star(rng, {test::uniform(rng, 0, 10), test::uniform(rng, 0, 10)}, 2.0));
    }
    const double theta = 0.4;
    const CellMask plain = compute_mask(kCell, targets);
    const CellMask buffered = compute_buffered_mask(kCell, targets, theta);
    int filtered = 0;
    for (int i = 0; i < 400; ++i) {
      const Geometry a = Point{test::uniform(rng, 0, 10), test::uniform(rng, 0, 10)};
      if (mask_encloses(plain, a)) {
        ++filtered;
        for (const auto& t : targets) EXPECT_EQ(geom::relate(a, t), geom::TopoSet{geom::Topo::Disjoint});
      }
      if (mask_encloses(buffered, a)) {
        EXPECT_TRUE(mask_encloses(plain, a));
        for (const auto& t : targets) EXPECT_GT(geom::distance(a, t), theta);
      }
    }
    EXPECT_GT(filtered, 0);
  }
}

TEST(MaskEncloses, BoundaryContactIsNotFiltered) {
  const CellMask m = compute_mask(kCell, geoms({square(2, 2, 4, 4)}));
  EXPECT_FALSE(mask_encloses(m, Point{4, 3}));
  EXPECT_FALSE(mask_encloses(m, square(4, 3, 5, 4)));
  EXPECT_FALSE(mask_encloses(m, geom::PolyLine{{0, 0}, {2, 2}}));
  EXPECT_TRUE(mask_encloses(m, square(6, 6, 7, 7)));
  EXPECT_TRUE(mask_encloses(m, Point{4.001, 3}));
}

GridIndex sample_grid(std::uint64_t seed, double cell_size) {
  std::mt19937_64 rng(seed);
  std::vector<geom::Polygon> polys;
  for (int i = 0; i < 40; ++i) {
    polys.push_back(test::random_star(rng, {test::uniform(rng, 0, 20), test::uniform(rng, 0, 20)}, 1.5));
  }
  return build_grid(test::make_targets(polys), cell_size);
}

TEST(MaskStore, OneMaskPerPopulatedCell) {
  const GridIndex g = build_grid(std::vector<std::pair<std::string, Geometry>>{
                                     {"b1", square(1, 1, 2, 2)},
                                     {"b2", square(11, 1, 12, 2)},
                                     {"b3", square(1, 11, 2, 12)}},
                                 10.0);
  const MaskStore store = build_masks(g);
  EXPECT_EQ(store.size(), 3u);
  EXPECT_THROW(store.at(CellKey{50, 50}), std::out_of_range);
}

TEST(MaskStore, RebuildIsBitStable) {
  const GridIndex g = sample_grid(67, 2.5);
  for (MaskKind kind : {MaskKind::Plain, MaskKind::Buffered}) {
    const MaskOptions opts{kind, kind == MaskKind::Buffered ? 0.5 : 0.0};
    const MaskStore a = build_masks(g, opts);
    MaskOptions threaded = opts;
    threaded.threads = 4;
    const MaskStore b = build_masks(g, threaded);
    std::vector<std::string> wa, wb;
    a.for_each([&](const CellMask& m) { wa.push_back(to_wkt(m.geometry())); });
    b.for_each([&](const CellMask& m) { wb.push_back(to_wkt(m.geometry())); });
    EXPECT_EQ(wa, wb);
  }
}

TEST(MaskStore, LazyMatchesEager) {
  const GridIndex g = sample_grid(71, 2.5);
  const MaskStore eager = build_masks(g, {MaskKind::Plain});
  const MaskStore lazy = build_masks(g, {MaskKind::Plain, 0.0, true});
  EXPECT_EQ(eager.computed(), eager.size());
  EXPECT_EQ(lazy.computed(), 0u);
  const CellKey first = g.cells().begin()->first;
  EXPECT_EQ(to_wkt(lazy.at(first).geometry()), to_wkt(eager.at(first).geometry()));
  EXPECT_EQ(lazy.computed(), 1u);
  lazy.for_each([&](const CellMask& m) {
    EXPECT_EQ(to_wkt(m.geometry()), to_wkt(eager.at(m.cell.key).geometry()));
  });
  EXPECT_EQ(lazy.computed(), lazy.size());
}

TEST(MaskStore, MasksPartitionEveryCell) {
  const GridIndex g = sample_grid(73, 2.5);
  const MaskStore store = build_masks(g);
  store.for_each([&](const CellMask& m) {
    std::vector<Geometry> assigned;
    for (TargetIndex t : g.targets_in(m.cell.key)) assigned.push_back(g.target(t).geometry);
    const auto inside = geom::intersection(Geometry{geom::union_all(assigned)},
                                           Geometry{geom::to_polygon(m.cell.box)});
    const double cell_area = geom::area(geom::to_polygon(m.cell.box));
    EXPECT_NEAR((geom::area(m.geometry()) + geom::area(inside)) / cell_area, 1.0, 1e-6);
  });
}

}  // namespace
}  // namespace masklink
