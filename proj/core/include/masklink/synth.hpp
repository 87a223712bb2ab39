#pragma once

// Deterministic synthetic datasets. Targets are polygons that cover roughly
// a requested fraction of the extent; sources are points or small polygons
// spread uniformly over it and produced one at a time.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "masklink/geometry.hpp"
#include "masklink/grid.hpp"

namespace masklink {

inline constexpr std::uint64_t kDefaultSeed = 42;

enum class TargetShape { Axis, Rotated, Noisy, Mixed };
enum class TargetLayout {
  Uniform,  // independent polygons, overlaps allowed
  Patchy,   // fully tiled patches next to sparse patches of small polygons
};
enum class SourceKind { Points, Polygons };

struct SynthOptions {
  std::uint64_t seed = kDefaultSeed;
  std::size_t n_targets = 1000;
  double coverage = 0.5;  // in (0, 1)
  geom::Box extent{{0.0, 0.0}, {100.0, 100.0}};
  TargetShape shape = TargetShape::Mixed;
  TargetLayout layout = TargetLayout::Uniform;
  double size_spread = 8.0;   // max/min radius ratio, log-uniform
  int noisy_vertices = 48;
  double max_aspect = 2.0;        // rectangles: aspect ratio drawn from [1/max, max]
  double noise_depth = 0.3;       // Noisy: vertex radius drawn from [1 - depth, 1]
  double patch_size = 5.0;        // Patchy: patch edge
  double tile_size = 2.5;         // Patchy: tiles in dense patches
  double dense_share = 0.9;       // Patchy: share of coverage from dense patches
  SourceKind sources = SourceKind::Points;
  double source_size = 0.2;       // Polygons: source radius
};

/// Throws Error(DomainError) on a coverage outside (0, 1), an empty extent
/// or non-positive sizes.
void check_options(const SynthOptions& options);

/// Targets with ids "b0", "b1", ...
std::vector<Target> generate_targets(const SynthOptions& options);

/// Streams `count` sources with ids "a0", "a1", ...; independent of the
/// target stream for the same seed.
class SourceGenerator {
 public:
  SourceGenerator(const SynthOptions& options, std::size_t count);
  std::optional<std::pair<std::string, geom::Geometry>> next();

 private:
  SynthOptions options_;
  std::size_t count_;
  std::size_t emitted_ = 0;
  std::mt19937_64 rng_;
};

/// Fraction of the extent covered by `targets`, sampled at pixel centers of
/// a resolution x resolution raster.
double raster_coverage(const std::vector<Target>& targets, const geom::Box& extent,
                       int resolution = 512);

/// CSV rows `id,"WKT"` without a header.
void write_csv(std::ostream& out, const std::string& id, const geom::Geometry& g);
void write_targets_csv(std::ostream& out, const std::vector<Target>& targets);
void write_sources_csv(std::ostream& out, SourceGenerator& sources);

}  // namespace masklink
