#include "masklink/linkage.hpp"

#include <algorithm>
#include <cmath>

namespace masklink {

const char* to_string(RelationKind k) noexcept {
  switch (k) {
    case RelationKind::Within: return "within";
    case RelationKind::Covers: return "covers";
    case RelationKind::Overlaps: return "overlaps";
    case RelationKind::Meets: return "meets";
    case RelationKind::Disjoint: return "disjoint";
    case RelationKind::Nearby: return "nearby";
  }
  return "?";
}

std::optional<RelationKind> parse_relation(std::string_view name) {
  for (auto k : {RelationKind::Within, RelationKind::Covers, RelationKind::Overlaps,
                 RelationKind::Meets, RelationKind::Disjoint, RelationKind::Nearby}) {
    if (name == to_string(k)) return k;
  }
  return std::nullopt;
}

ComparisonStats& ComparisonStats::operator+=(const ComparisonStats& o) {
  sources += o.sources;
  source_errors += o.source_errors;
  mask_tests += o.mask_tests;
  filtered_by_mask += o.filtered_by_mask;
  refinement_tests += o.refinement_tests;
  candidates_seen += o.candidates_seen;
  links_emitted += o.links_emitted;
  verified_inferences += o.verified_inferences;
  verify_contradictions += o.verify_contradictions;
  verify_band += o.verify_band;
  return *this;
}

namespace {

RelationKind to_relation(geom::Topo t) {
  switch (t) {
    case geom::Topo::Within: return RelationKind::Within;
    case geom::Topo::Covers: return RelationKind::Covers;
    case geom::Topo::Overlaps: return RelationKind::Overlaps;
    case geom::Topo::Meets: return RelationKind::Meets;
    case geom::Topo::Disjoint: return RelationKind::Disjoint;
  }
  return RelationKind::Disjoint;
}

void sort_unique(std::vector<TargetIndex>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

bool sorted_contains(std::span<const TargetIndex> v, TargetIndex t) {
  return std::binary_search(v.begin(), v.end(), t);
}

}  // namespace

Engine::Engine(const GridIndex& grid, const MaskStore* masks, EngineOptions options)
    : grid_(&grid), masks_(masks), options_(options) {
  if (options_.mode == LinkMode::Nearby && !(options_.theta > 0.0)) {
    throw Error(ErrorCode::NonPositiveTheta, "nearby linking needs theta > 0");
  }
  if (options_.strategy != Strategy::MaskLink) return;
  if (masks_ == nullptr) throw Error(ErrorCode::DomainError, "MaskLink needs a mask store");
  if (options_.mode == LinkMode::Topological && masks_->kind() != MaskKind::Plain) {
    throw Error(ErrorCode::ThetaMismatch, "topological linking needs plain masks");
  }
  if (options_.mode == LinkMode::Nearby &&
      (masks_->kind() != MaskKind::Buffered || masks_->theta() != options_.theta)) {
    throw Error(ErrorCode::ThetaMismatch, "masks were built for a different theta");
  }
}

LinkPlan Engine::plan(const geom::Geometry& a, ComparisonStats& stats) const {
  LinkPlan p = options_.strategy == Strategy::MaskLink ? plan_masklink(a, stats) : plan_baseline(a);
  if (options_.mode == LinkMode::Nearby) add_ring(a, p);
  stats.candidates_seen += p.tests() + p.inferred_disjoint.size();
  return p;
}

LinkPlan Engine::plan_baseline(const geom::Geometry& a) const {
  LinkPlan p;
  p.refine = grid_->candidates(a);
  return p;
}

void Engine::add_ring(const geom::Geometry& a, LinkPlan& p) const {
  // Targets reachable only through the theta-ring are always refined.
  std::vector<TargetIndex> near;
  for (const auto& c : grid_->locate_cells_near(a, options_.theta)) {
    const auto ids = grid_->targets_in(c.key);
    near.insert(near.end(), ids.begin(), ids.end());
  }
  sort_unique(near);
  std::vector<TargetIndex> shared;
  std::merge(p.refine.begin(), p.refine.end(), p.inferred_disjoint.begin(),
             p.inferred_disjoint.end(), std::back_inserter(shared));
  std::set_difference(near.begin(), near.end(), shared.begin(), shared.end(),
                      std::back_inserter(p.refine_ring));
}

LinkPlan Engine::plan_masklink(const geom::Geometry& a, ComparisonStats& stats) const {
  LinkPlan p;
  std::vector<TargetIndex> filtered;
  std::vector<CellKey> filtered_cells;
  for (const auto& c : grid_->locate_cells(a)) {
    ++stats.mask_tests;
    const auto ids = grid_->targets_in(c.key);
    if (mask_encloses(masks_->at(c.key), a)) {
      ++stats.filtered_by_mask;
      filtered_cells.push_back(c.key);
      filtered.insert(filtered.end(), ids.begin(), ids.end());
    } else {
      p.refine.insert(p.refine.end(), ids.begin(), ids.end());
    }
  }
  sort_unique(filtered);
  sort_unique(p.refine);
  std::set_difference(filtered.begin(), filtered.end(), p.refine.begin(), p.refine.end(),
                      std::back_inserter(p.inferred_disjoint));

  if (options_.mode == LinkMode::Topological || p.inferred_disjoint.empty()) return p;

  // A buffered-mask hit only clears the part of `a` inside that cell. A
  // target stays inferred only if every other cell `a` may touch is
  // farther than theta from it.
  std::vector<CellKey> keys;
  grid_->keys_overlapping(geom::envelope(a), keys);
  std::vector<TargetIndex> confirmed;
  for (TargetIndex t : p.inferred_disjoint) {
    const auto& env = grid_->target(t).envelope;
    const bool safe = std::all_of(keys.begin(), keys.end(), [&](const CellKey& key) {
      const bool filtered_here =
          std::find(filtered_cells.begin(), filtered_cells.end(), key) != filtered_cells.end();
      if (filtered_here && sorted_contains(grid_->targets_in(key), t)) return true;
      return geom::box_distance(grid_->cell_box(key), env) > options_.theta;
    });
    (safe ? confirmed : p.refine).push_back(t);
  }
  p.inferred_disjoint = std::move(confirmed);
  sort_unique(p.refine);
  return p;
}

void Engine::refine(const std::string& a_id, const geom::Geometry& a, TargetIndex target,
                    bool shared_cell, ComparisonStats& stats, std::vector<Link>& out) const {
  ++stats.refinement_tests;
  const Target& b = grid_->target(target);
  if (options_.mode == LinkMode::Nearby) {
    if (geom::within_distance(a, b.geometry, options_.theta)) {
      out.push_back(Link{a_id, Relation{RelationKind::Nearby, options_.theta}, b.id});
      ++stats.links_emitted;
    } else if (shared_cell && options_.emit_disjoint) {
      out.push_back(Link{a_id, Relation{RelationKind::Disjoint, 0.0}, b.id});
      ++stats.links_emitted;
    }
    return;
  }
  geom::relate(a, b.geometry).for_each([&](geom::Topo t) {
    if (t == geom::Topo::Disjoint && !(shared_cell && options_.emit_disjoint)) return;
    out.push_back(Link{a_id, Relation{to_relation(t), 0.0}, b.id});
    ++stats.links_emitted;
  });
}

void Engine::emit_inferred(const std::string& a_id, const geom::Geometry& a,
                           std::span<const TargetIndex> targets, ComparisonStats& stats,
                           std::vector<Link>& out) const {
  if (options_.verify_inferences) {
    const int spq = masks_ ? masks_->options().segments_per_quarter : geom::kDefaultSegmentsPerQuarter;
    for (TargetIndex t : targets) {
      ++stats.verified_inferences;
      const auto& b = grid_->target(t).geometry;
      if (options_.mode == LinkMode::Topological) {
        if (geom::relate(a, b) != geom::TopoSet{geom::Topo::Disjoint}) ++stats.verify_contradictions;
      } else {
        const double d = geom::distance(a, b);
        if (d <= options_.theta) {
          if (d > options_.theta - geom::buffer_chord_error(options_.theta, spq)) {
            ++stats.verify_band;
          } else {
            ++stats.verify_contradictions;
          }
        }
      }
    }
  }
  if (!options_.emit_disjoint) return;
  for (TargetIndex t : targets) {
    out.push_back(Link{a_id, Relation{RelationKind::Disjoint, 0.0}, grid_->target(t).id});
    ++stats.links_emitted;
  }
}

std::vector<Link> Engine::link(const std::string& a_id, const geom::Geometry& a,
                               ComparisonStats& stats) const {
  ++stats.sources;
  const LinkPlan p = plan(a, stats);
  std::vector<Link> out;
  emit_inferred(a_id, a, p.inferred_disjoint, stats, out);
  for (TargetIndex t : p.refine) refine(a_id, a, t, true, stats, out);
  for (TargetIndex t : p.refine_ring) refine(a_id, a, t, false, stats, out);
  return out;
}

std::vector<Link> topological_links(const std::string& a_id, const geom::Geometry& a,
                                    const GridIndex& grid, const MaskStore& masks,
                                    ComparisonStats& stats) {
  const Engine engine(grid, &masks, EngineOptions{LinkMode::Topological, Strategy::MaskLink});
  return engine.link(a_id, a, stats);
}

std::vector<Link> nearby_links(const std::string& a_id, const geom::Geometry& a,
                               const GridIndex& grid, const MaskStore& masks, double theta,
                               ComparisonStats& stats) {
  EngineOptions opts;
  opts.mode = LinkMode::Nearby;
  opts.theta = theta;
  const Engine engine(grid, &masks, opts);
  return engine.link(a_id, a, stats);
}

std::vector<Link> baseline_links(const std::string& a_id, const geom::Geometry& a,
                                 const GridIndex& grid, ComparisonStats& stats, double theta) {
  EngineOptions opts;
  opts.strategy = Strategy::Baseline;
  if (theta > 0.0) {
    opts.mode = LinkMode::Nearby;
    opts.theta = theta;
  }
  const Engine engine(grid, nullptr, opts);
  return engine.link(a_id, a, stats);
}

std::vector<Link> brute_force_links(const std::string& a_id, const geom::Geometry& a,
                                    std::span<const Target> targets, LinkMode mode,
                                    double theta, ComparisonStats& stats) {
  if (mode == LinkMode::Nearby && !(theta > 0.0)) {
    throw Error(ErrorCode::NonPositiveTheta, "nearby linking needs theta > 0");
  }
  ++stats.sources;
  std::vector<Link> out;
  for (const auto& b : targets) {
    ++stats.refinement_tests;
    if (mode == LinkMode::Nearby) {
      const bool near = geom::distance(a, b.geometry) <= theta;
      out.push_back(Link{a_id,
                         near ? Relation{RelationKind::Nearby, theta} : Relation{RelationKind::Disjoint, 0.0},
                         b.id});
    } else {
      geom::relate(a, b.geometry).for_each([&](geom::Topo t) {
        out.push_back(Link{a_id, Relation{to_relation(t), 0.0}, b.id});
      });
    }
  }
  stats.links_emitted += out.size();
  return out;
}

double predict_gain(double p, double k) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::DomainError, "p must lie in [0, 1]");
  if (!(k >= 1.0) || !std::isfinite(k)) throw Error(ErrorCode::DomainError, "k must be >= 1");
  return (p + (1.0 - p) * (k + 1.0)) / k;
}

}  // namespace masklink
