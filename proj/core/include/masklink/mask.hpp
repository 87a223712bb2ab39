#pragma once

// Per-cell empty space ("mask"): the cell box minus the union of the target
// areas assigned to the cell. The buffered variant subtracts theta-buffered
// target areas instead and drives proximity linking.

#include <algorithm>
#include <atomic>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

#include "masklink/geom.hpp"
#include "masklink/grid.hpp"

namespace masklink {

enum class MaskKind { Plain, Buffered };

struct CellMask {
  Cell cell;
  MaskKind kind = MaskKind::Plain;
  double theta = 0.0;           // Buffered only
  geom::PreparedAreal covered;  // union of (buffered) targets clipped to the cell
                                // (grown by `clearance` when buffered)
  // Distance a source must keep from `covered` to be filtered: kEpsilon,
  // plus the buffer chord error for buffered masks (the polygonal buffer
  // is inscribed in the true one).
  double clearance = geom::kEpsilon;

  /// Empty space inside the cell. Linking only needs `covered`, so the
  /// difference is computed on first use.
  const geom::MultiPolygon& geometry() const;
  bool empty() const { return geometry().empty(); }

 private:
  struct Lazy {
    std::once_flag once;
    geom::MultiPolygon value;
  };
  std::shared_ptr<Lazy> lazy_ = std::make_shared<Lazy>();
};

CellMask compute_mask(const Cell& cell, std::span<const geom::Geometry> targets);

CellMask compute_buffered_mask(const Cell& cell, std::span<const geom::Geometry> targets,
                               double theta,
                               int segments_per_quarter = geom::kDefaultSegmentsPerQuarter);

/// Mask test (`a` must meet the cell): true when the part of `a` inside the
/// cell lies in the empty space, farther than `mask.clearance` from every
/// covered point (so boundary contact is never filtered). Measured on the
/// whole of `a`, which can only be stricter than the clipped part.
bool mask_encloses(const CellMask& mask, const geom::Geometry& a);

struct MaskOptions {
  MaskKind kind = MaskKind::Plain;
  double theta = 0.0;
  bool lazy = false;
  int segments_per_quarter = geom::kDefaultSegmentsPerQuarter;
  unsigned threads = 1;  // eager build only
};

/// One CellMask per populated cell of the grid it was built from (the grid
/// must outlive the store). Frozen after construction; lazy stores compute a
/// cell on first touch and are safe to read from concurrent workers.
class MaskStore {
 public:
  MaskStore(const GridIndex& grid, MaskOptions options);
  MaskStore(MaskStore&&) noexcept = default;
  MaskStore& operator=(MaskStore&&) noexcept = default;

  MaskKind kind() const noexcept { return options_.kind; }
  double theta() const noexcept { return options_.theta; }
  bool lazy() const noexcept { return options_.lazy; }
  const MaskOptions& options() const noexcept { return options_; }
  std::size_t size() const noexcept { return slots_.size(); }

  /// Mask of a populated cell; throws std::out_of_range otherwise.
  const CellMask& at(const CellKey& key) const;
  bool contains(const CellKey& key) const { return index_.contains(key); }

  /// Number of masks materialized so far.
  std::size_t computed() const;

  /// Visits every mask in key order (materializing lazy ones).
  template <typename F>
  void for_each(F&& f) const {
    std::vector<CellKey> keys;
    keys.reserve(index_.size());
    for (const auto& [k, _] : index_) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    for (const auto& k : keys) f(at(k));
  }

 private:
  struct Slot {
    Cell cell;
    std::once_flag once;
    std::optional<CellMask> mask;
  };

  const CellMask& materialize(Slot& slot) const;
  const geom::MultiPolygon& buffered_target(TargetIndex i) const;

  const GridIndex* grid_;
  MaskOptions options_;
  std::unordered_map<CellKey, std::size_t, CellKeyHash> index_;
  std::vector<std::unique_ptr<Slot>> slots_;
  struct BufferSlot {
    std::once_flag once;
    geom::MultiPolygon geometry;
  };
  std::vector<std::unique_ptr<BufferSlot>> buffers_;
  std::unique_ptr<std::atomic<std::size_t>> computed_ = std::make_unique<std::atomic<std::size_t>>(0);
};

/// Builds the store for `grid`. With `options.lazy == false` every mask is
/// computed up front (optionally on several threads).
MaskStore build_masks(const GridIndex& grid, MaskOptions options = {});

}  // namespace masklink
