#pragma once

// Link-discovery engines: MaskLink for topological relations and for
// `nearby`, the plain grid baseline, and a brute-force oracle.

#include <span>
#include <vector>

#include "masklink/geom.hpp"
#include "masklink/grid.hpp"
#include "masklink/mask.hpp"
#include "masklink/relation.hpp"

namespace masklink {

enum class LinkMode { Topological, Nearby };
enum class Strategy { MaskLink, Baseline };

struct EngineOptions {
  LinkMode mode = LinkMode::Topological;
  Strategy strategy = Strategy::MaskLink;
  double theta = 0.0;               // Nearby only
  bool emit_disjoint = true;        // false suppresses Disjoint links
  bool verify_inferences = false;   // re-check every mask inference
};

/// Filter outcome for one source entity.
struct LinkPlan {
  std::vector<TargetIndex> refine;             // shared-cell targets to test exactly
  std::vector<TargetIndex> refine_ring;        // nearby only: reached through the theta-ring
  std::vector<TargetIndex> inferred_disjoint;  // settled by a mask hit

  std::size_t tests() const noexcept { return refine.size() + refine_ring.size(); }
};

/// Immutable engine over a frozen grid (and mask store for MaskLink).
/// Safe to share between workers; all mutable state lives in the caller's
/// ComparisonStats and output vectors.
class Engine {
 public:
  Engine(const GridIndex& grid, const MaskStore* masks, EngineOptions options);

  const EngineOptions& options() const noexcept { return options_; }
  const GridIndex& grid() const noexcept { return *grid_; }

  /// Filter step: cell location and, for MaskLink, the per-cell mask test.
  LinkPlan plan(const geom::Geometry& a, ComparisonStats& stats) const;

  /// Exact test of one pair; appends the holding relations to `out`.
  /// Disjoint is only reported for shared-cell targets.
  void refine(const std::string& a_id, const geom::Geometry& a, TargetIndex target,
              bool shared_cell, ComparisonStats& stats, std::vector<Link>& out) const;

  /// Disjoint links for targets settled by the filter (honours
  /// emit_disjoint and verify_inferences).
  void emit_inferred(const std::string& a_id, const geom::Geometry& a,
                     std::span<const TargetIndex> targets, ComparisonStats& stats,
                     std::vector<Link>& out) const;

  /// Filter + refine for one entity, sequentially.
  std::vector<Link> link(const std::string& a_id, const geom::Geometry& a,
                         ComparisonStats& stats) const;

 private:
  LinkPlan plan_masklink(const geom::Geometry& a, ComparisonStats& stats) const;
  LinkPlan plan_baseline(const geom::Geometry& a) const;
  void add_ring(const geom::Geometry& a, LinkPlan& p) const;

  const GridIndex* grid_;
  const MaskStore* masks_;
  EngineOptions options_;
};

/// Topological links of `a` with plain-mask filtering.
std::vector<Link> topological_links(const std::string& a_id, const geom::Geometry& a,
                                    const GridIndex& grid, const MaskStore& masks,
                                    ComparisonStats& stats);

/// `nearby` links with theta-buffered masks. Throws
/// ThetaMismatch if `masks` was built for another theta.
std::vector<Link> nearby_links(const std::string& a_id, const geom::Geometry& a,
                               const GridIndex& grid, const MaskStore& masks, double theta,
                               ComparisonStats& stats);

/// Grid filtering only; every candidate is refined. `theta > 0` selects
/// nearby mode.
std::vector<Link> baseline_links(const std::string& a_id, const geom::Geometry& a,
                                 const GridIndex& grid, ComparisonStats& stats,
                                 double theta = 0.0);

/// Every pair evaluated, no index. Topological mode emits every holding
/// relation (Disjoint included); nearby mode emits Nearby or Disjoint.
/// Callers restrict Disjoint to shared-cell pairs before comparing.
std::vector<Link> brute_force_links(const std::string& a_id, const geom::Geometry& a,
                                    std::span<const Target> targets, LinkMode mode,
                                    double theta, ComparisonStats& stats);

/// Expected MaskLink/baseline comparison ratio (p + (1-p)(k+1)) / k for a
/// cell with k targets and filter probability p. Below 1 iff p > 1/k.
double predict_gain(double p, double k);

}  // namespace masklink
