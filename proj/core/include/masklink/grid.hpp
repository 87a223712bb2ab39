#pragma once

// Equi-grid space tiling over the target dataset. Only populated cells are
// stored. Cells are half-open boxes; a target id appears in every cell it
// reaches, found by floor arithmetic on its MBB and confirmed against the
// closed cell box.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "masklink/geometry.hpp"

namespace masklink {

using TargetIndex = std::uint32_t;

inline constexpr double kDefaultCellSize = 2.5;

struct CellKey {
  std::int32_t ix = 0;
  std::int32_t iy = 0;

  friend bool operator==(const CellKey&, const CellKey&) = default;
  friend auto operator<=>(const CellKey&, const CellKey&) = default;
};

struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const noexcept {
    const auto ux = static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.ix));
    const auto uy = static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.iy));
    return std::hash<std::uint64_t>{}((ux << 32) | uy);
  }
};

struct GridConfig {
  geom::Point origin;
  double cell_size = kDefaultCellSize;
  geom::Box extent;
};

struct Cell {
  CellKey key;
  geom::Box box;
};

struct Target {
  std::string id;
  geom::Geometry geometry;
  geom::Box envelope;
};

class GridIndex {
 public:
  using CellMap = std::unordered_map<CellKey, std::vector<TargetIndex>, CellKeyHash>;

  GridIndex(GridConfig config, std::vector<Target> targets, CellMap cells);

  const GridConfig& config() const noexcept { return config_; }
  double cell_size() const noexcept { return config_.cell_size; }

  const std::vector<Target>& targets() const noexcept { return targets_; }
  const Target& target(TargetIndex i) const { return targets_.at(i); }

  const CellMap& cells() const noexcept { return cells_; }
  std::size_t cell_count() const noexcept { return cells_.size(); }

  /// Target ids assigned to `key`, sorted; empty span for unpopulated cells.
  std::span<const TargetIndex> targets_in(const CellKey& key) const;
  bool populated(const CellKey& key) const { return cells_.contains(key); }

  geom::Box cell_box(const CellKey& key) const;
  Cell cell(const CellKey& key) const { return Cell{key, cell_box(key)}; }

  /// Populated cells that `a` reaches (Ψ), sorted by key.
  std::vector<Cell> locate_cells(const geom::Geometry& a) const;

  /// Populated cells whose box intersects MBB(a) expanded by `margin`.
  std::vector<Cell> locate_cells_near(const geom::Geometry& a, double margin) const;

  /// D(A): the deduplicated, sorted union of target ids over locate_cells(a).
  std::vector<TargetIndex> candidates(const geom::Geometry& a) const;

  /// Cell keys whose half-open boxes intersect `box`, populated or not.
  void keys_overlapping(const geom::Box& box, std::vector<CellKey>& out) const;

  /// Closed cell box, widened by a relative 1e-9, used for exact confirmation.
  geom::Box probe_box(const CellKey& key) const;

 private:
  GridConfig config_;
  std::vector<Target> targets_;
  CellMap cells_;
};

/// Builds the index. Targets must be non-empty, valid and areal;
/// `cell_size` must be positive. The origin snaps to the floor of the
/// extent's min corner in multiples of `cell_size`.
GridIndex build_grid(std::vector<Target> targets, double cell_size = kDefaultCellSize);

/// Convenience overload: (id, geometry) pairs.
GridIndex build_grid(std::vector<std::pair<std::string, geom::Geometry>> targets,
                     double cell_size = kDefaultCellSize);

/// Exact test of `a` against a closed box.
bool intersects_box(const geom::Geometry& a, const geom::Box& box);

}  // namespace masklink
