#include "masklink/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "masklink/geom.hpp"

namespace masklink {

namespace {

std::int32_t to_index(double v) {
  if (!(std::abs(v) < static_cast<double>(std::numeric_limits<std::int32_t>::max() - 2))) {
    throw Error(ErrorCode::DomainError, "grid coordinate out of range for the cell size");
  }
  return static_cast<std::int32_t>(std::floor(v));
}

}  // namespace

bool intersects_box(const geom::Geometry& a, const geom::Box& box) {
  return geom::within_distance(a, geom::Geometry{geom::to_polygon(box)}, 0.0);
}

GridIndex::GridIndex(GridConfig config, std::vector<Target> targets, CellMap cells)
    : config_(config), targets_(std::move(targets)), cells_(std::move(cells)) {}

std::span<const TargetIndex> GridIndex::targets_in(const CellKey& key) const {
  const auto it = cells_.find(key);
  if (it == cells_.end()) return {};
  return it->second;
}

geom::Box GridIndex::cell_box(const CellKey& key) const {
  const double cs = config_.cell_size;
  const auto& o = config_.origin;
  return geom::Box{{o.x + key.ix * cs, o.y + key.iy * cs},
                   {o.x + (key.ix + 1) * cs, o.y + (key.iy + 1) * cs}};
}

void GridIndex::keys_overlapping(const geom::Box& box, std::vector<CellKey>& out) const {
  const double cs = config_.cell_size;
  // Cells are half-open, so a coordinate on a grid line belongs to the cell
  // above or to the right of it.
  const std::int32_t x0 = to_index((box.min_corner().x - config_.origin.x) / cs);
  const std::int32_t x1 = to_index((box.max_corner().x - config_.origin.x) / cs);
  const std::int32_t y0 = to_index((box.min_corner().y - config_.origin.y) / cs);
  const std::int32_t y1 = to_index((box.max_corner().y - config_.origin.y) / cs);
  for (std::int32_t ix = x0; ix <= x1; ++ix) {
    for (std::int32_t iy = y0; iy <= y1; ++iy) out.push_back(CellKey{ix, iy});
  }
}

geom::Box GridIndex::probe_box(const CellKey& key) const {
  // Widened by a hair so that rounding in the index arithmetic never drops
  // a geometry from a cell it reaches.
  return geom::expand(cell_box(key), config_.cell_size * 1e-9);
}

std::vector<Cell> GridIndex::locate_cells(const geom::Geometry& a) const {
  std::vector<CellKey> keys;
  const geom::Box env = geom::envelope(a);
  keys_overlapping(env, keys);
  std::vector<Cell> out;
  const bool single = keys.size() == 1;
  for (const auto& key : keys) {
    if (!populated(key)) continue;
    const Cell c = cell(key);
    // Points and single-cell geometries are settled by the MBB.
    if (single || std::holds_alternative<geom::Point>(a) || intersects_box(a, probe_box(key))) {
      out.push_back(c);
    }
  }
  return out;
}

std::vector<Cell> GridIndex::locate_cells_near(const geom::Geometry& a, double margin) const {
  std::vector<CellKey> keys;
  keys_overlapping(geom::expand(geom::envelope(a), margin), keys);
  std::vector<Cell> out;
  for (const auto& key : keys) {
    if (populated(key)) out.push_back(cell(key));
  }
  return out;
}

std::vector<TargetIndex> GridIndex::candidates(const geom::Geometry& a) const {
  std::vector<TargetIndex> out;
  for (const auto& c : locate_cells(a)) {
    const auto ids = targets_in(c.key);
    out.insert(out.end(), ids.begin(), ids.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

GridIndex build_grid(std::vector<Target> targets, double cell_size) {
  if (!(cell_size > 0.0) || !std::isfinite(cell_size)) {
    throw Error(ErrorCode::DomainError, "cell_size must be positive");
  }
  if (targets.empty()) throw Error(ErrorCode::EmptyTargetSet, "target dataset is empty");

  geom::Box extent = geom::envelope(targets.front().geometry);
  for (auto& t : targets) {
    if (!geom::is_areal(t.geometry)) {
      throw Error(ErrorCode::InvalidGeometry,
                  "target '" + t.id + "' is not areal (" + geom::type_name(t.geometry) + ")");
    }
    if (geom::is_empty(t.geometry) || geom::area(t.geometry) <= 0.0) {
      throw Error(ErrorCode::InvalidGeometry, "target '" + t.id + "' has an empty geometry");
    }
    t.envelope = geom::envelope(t.geometry);
    geom::bg::expand(extent, t.envelope);
  }

  GridConfig config;
  config.cell_size = cell_size;
  config.origin = {std::floor(extent.min_corner().x / cell_size) * cell_size,
                   std::floor(extent.min_corner().y / cell_size) * cell_size};
  config.extent = extent;

  GridIndex::CellMap cells;
  GridIndex probe(config, {}, {});
  std::vector<CellKey> keys;
  for (TargetIndex i = 0; i < targets.size(); ++i) {
    const auto& t = targets[i];
    keys.clear();
    probe.keys_overlapping(t.envelope, keys);
    const bool single = keys.size() == 1;
    for (const auto& key : keys) {
      // MBB prefilter above, exact confirmation here.
      if (single || intersects_box(t.geometry, probe.probe_box(key))) cells[key].push_back(i);
    }
  }
  // Insertion order is already ascending by target index.
  return GridIndex(config, std::move(targets), std::move(cells));
}

GridIndex build_grid(std::vector<std::pair<std::string, geom::Geometry>> targets, double cell_size) {
  std::vector<Target> ts;
  ts.reserve(targets.size());
  for (auto& [id, g] : targets) ts.push_back(Target{std::move(id), std::move(g), {}});
  return build_grid(std::move(ts), cell_size);
}

}  // namespace masklink
