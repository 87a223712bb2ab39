#include "masklink/mask.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace masklink {

namespace {

double clearance_for(MaskKind kind, double theta, int segments_per_quarter) {
  return kind == MaskKind::Buffered
             ? geom::kEpsilon + geom::buffer_chord_error(theta, segments_per_quarter)
             : geom::kEpsilon;
}

// Buffered pieces are clipped to the cell grown by the clearance: a point
// of the cell inside a true buffer is within the chord error of the
// polygonal buffer, but that nearest point may lie just outside the cell.
geom::Box clip_frame(const Cell& cell, MaskKind kind, double clearance) {
  if (kind == MaskKind::Plain) return cell.box;
  const auto& lo = cell.box.min_corner();
  const auto& hi = cell.box.max_corner();
  return geom::Box{{lo.x - clearance, lo.y - clearance}, {hi.x + clearance, hi.y + clearance}};
}

CellMask finish(const Cell& cell, MaskKind kind, double theta, double clearance,
                const geom::Box& frame, std::vector<geom::MultiPolygon> pieces) {
  CellMask m;
  m.cell = cell;
  m.kind = kind;
  m.theta = theta;
  m.clearance = clearance;
  auto covered = geom::union_all(std::span<const geom::MultiPolygon>(pieces));
  m.covered = geom::PreparedAreal(std::move(covered), frame, 2 * clearance);
  return m;
}

}  // namespace

CellMask compute_mask(const Cell& cell, std::span<const geom::Geometry> targets) {
  std::vector<geom::MultiPolygon> pieces;
  pieces.reserve(targets.size());
  for (const auto& t : targets) {
    auto piece = geom::intersection(t, cell.box);
    if (!piece.empty()) pieces.push_back(std::move(piece));
  }
  return finish(cell, MaskKind::Plain, 0.0, geom::kEpsilon, cell.box, std::move(pieces));
}

CellMask compute_buffered_mask(const Cell& cell, std::span<const geom::Geometry> targets,
                               double theta, int segments_per_quarter) {
  if (!(theta > 0.0)) throw Error(ErrorCode::NonPositiveTheta, "theta must be positive");
  const double clearance = clearance_for(MaskKind::Buffered, theta, segments_per_quarter);
  const geom::Box frame = clip_frame(cell, MaskKind::Buffered, clearance);
  std::vector<geom::MultiPolygon> pieces;
  pieces.reserve(targets.size());
  for (const auto& t : targets) {
    auto piece = geom::intersection(geom::Geometry{geom::buffer(t, theta, segments_per_quarter)}, frame);
    if (!piece.empty()) pieces.push_back(std::move(piece));
  }
  return finish(cell, MaskKind::Buffered, theta, clearance, frame, std::move(pieces));
}

const geom::MultiPolygon& CellMask::geometry() const {
  std::call_once(lazy_->once, [&] {
    const geom::Polygon box = geom::to_polygon(cell.box);
    lazy_->value = covered.empty()
                       ? geom::MultiPolygon{box}
                       : geom::difference(geom::Geometry{box}, geom::Geometry{covered.geometry()});
  });
  return lazy_->value;
}

bool mask_encloses(const CellMask& mask, const geom::Geometry& a) {
  // A fully covered cell needs no special case: `a` meets the cell, so it
  // touches the covered region.
  // covered lies inside the cell, so d(a, covered) <= d(a ∩ cell, covered):
  // clearance of the whole source implies clearance of its in-cell part.
  return !mask.covered.within_distance(a, mask.clearance);
}

MaskStore::MaskStore(const GridIndex& grid, MaskOptions options)
    : grid_(&grid), options_(options) {
  if (options_.kind == MaskKind::Buffered && !(options_.theta > 0.0)) {
    throw Error(ErrorCode::NonPositiveTheta, "buffered masks need theta > 0");
  }
  std::vector<CellKey> keys;
  keys.reserve(grid.cell_count());
  for (const auto& [k, _] : grid.cells()) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  slots_.reserve(keys.size());
  for (const auto& k : keys) {
    index_.emplace(k, slots_.size());
    auto slot = std::make_unique<Slot>();
    slot->cell = grid.cell(k);
    slots_.push_back(std::move(slot));
  }
  if (options_.kind == MaskKind::Buffered) {
    buffers_.reserve(grid.targets().size());
    for (std::size_t i = 0; i < grid.targets().size(); ++i) {
      buffers_.push_back(std::make_unique<BufferSlot>());
    }
  }
}

const geom::MultiPolygon& MaskStore::buffered_target(TargetIndex i) const {
  auto& slot = *buffers_.at(i);
  std::call_once(slot.once, [&] {
    slot.geometry = geom::buffer(grid_->target(i).geometry, options_.theta,
                                 options_.segments_per_quarter);
  });
  return slot.geometry;
}

const CellMask& MaskStore::materialize(Slot& slot) const {
  std::call_once(slot.once, [&] {
    const bool buffered = options_.kind == MaskKind::Buffered;
    const double theta = buffered ? options_.theta : 0.0;
    const double clearance = clearance_for(options_.kind, theta, options_.segments_per_quarter);
    const geom::Box frame = clip_frame(slot.cell, options_.kind, clearance);
    std::vector<geom::MultiPolygon> pieces;
    for (TargetIndex i : grid_->targets_in(slot.cell.key)) {
      auto piece = buffered ? geom::intersection(geom::Geometry{buffered_target(i)}, frame)
                            : geom::intersection(grid_->target(i).geometry, frame);
      if (!piece.empty()) pieces.push_back(std::move(piece));
    }
    slot.mask = finish(slot.cell, options_.kind, theta, clearance, frame, std::move(pieces));
    computed_->fetch_add(1, std::memory_order_relaxed);
  });
  return *slot.mask;
}

const CellMask& MaskStore::at(const CellKey& key) const {
  const auto it = index_.find(key);
  if (it == index_.end()) throw std::out_of_range("no mask for an unpopulated cell");
  return materialize(*slots_[it->second]);
}

std::size_t MaskStore::computed() const { return computed_->load(std::memory_order_relaxed); }

MaskStore build_masks(const GridIndex& grid, MaskOptions options) {
  MaskStore store(grid, options);
  if (options.lazy) return store;

  std::vector<CellKey> keys;
  keys.reserve(store.size());
  for (const auto& [k, _] : grid.cells()) keys.push_back(k);
  std::sort(keys.begin(), keys.end());

  const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, keys.size()));
  if (threads == 1) {
    for (const auto& k : keys) store.at(k);
    return store;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < keys.size(); i = next++) {
        try {
          store.at(keys[i]);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return store;
}

}  // namespace masklink
