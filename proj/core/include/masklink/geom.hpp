#pragma once

// Geometry kernel: distance, topological predicates, boolean operations and
// buffering. All functions are pure and safe to call concurrently.

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>

#include "masklink/geometry.hpp"

namespace masklink::geom {

enum class Topo : std::uint8_t { Within, Covers, Overlaps, Meets, Disjoint };

const char* to_string(Topo t) noexcept;

/// Small bit set over Topo.
class TopoSet {
 public:
  TopoSet() = default;
  TopoSet(std::initializer_list<Topo> items) {
    for (Topo t : items) insert(t);
  }

  void insert(Topo t) { bits_ |= bit(t); }
  bool contains(Topo t) const { return (bits_ & bit(t)) != 0; }
  bool empty() const { return bits_ == 0; }
  std::size_t size() const { return static_cast<std::size_t>(__builtin_popcount(bits_)); }
  std::uint8_t bits() const { return bits_; }

  template <typename F>
  void for_each(F&& f) const {
    for (int i = 0; i < 5; ++i) {
      if (bits_ & (1u << i)) f(static_cast<Topo>(i));
    }
  }

  friend bool operator==(TopoSet, TopoSet) = default;

 private:
  static std::uint8_t bit(Topo t) { return static_cast<std::uint8_t>(1u << static_cast<int>(t)); }
  std::uint8_t bits_ = 0;
};

std::string to_string(TopoSet s);

// ---------------------------------------------------------------------------
// Distance

/// Point-to-point metric. Euclidean is the default; the hook exists so a
/// geodesic metric can be swapped in for point/point work.
using PointMetric = std::function<double(const Point&, const Point&)>;

double euclidean(const Point& a, const Point& b);

/// Minimum Euclidean distance between any point of `a` and any point of `b`
/// (segment interiors and polygon interiors included). Zero when the
/// geometries intersect or one contains the other. Symmetric.
double distance(const Geometry& a, const Geometry& b);

/// Distance between two points through a caller-supplied metric.
double distance(const Point& a, const Point& b, const PointMetric& metric);

/// True when distance(a, b) <= limit, with early exit.
bool within_distance(const Geometry& a, const Geometry& b, double limit);

/// Areal geometry prepared for repeated clearance queries: cached part
/// envelopes plus, optionally, a raster over `frame` that classifies each
/// sub-box as clear of, inside, or straddling the region boundary. Queries
/// whose envelope falls in uniformly classified sub-boxes skip the exact
/// distance computation.
class PreparedAreal {
 public:
  PreparedAreal() = default;
  explicit PreparedAreal(MultiPolygon mp);
  /// The raster answers queries with limit <= margin.
  PreparedAreal(MultiPolygon mp, const Box& frame, double margin, int resolution = 32);

  const MultiPolygon& geometry() const noexcept { return mp_; }
  const Box& envelope() const noexcept { return env_; }
  bool empty() const noexcept { return mp_.empty(); }

  /// Same answer as within_distance(a, geometry(), limit).
  bool within_distance(const Geometry& a, double limit) const;

 private:
  enum class Tile : std::uint8_t { Unknown, Clear, Inside, Mixed };

  void rasterize(const Box& frame, double margin, int resolution);
  std::optional<bool> classify(const Box& query) const;

  MultiPolygon mp_;
  std::vector<Box> boxes_;
  Box env_;
  Box frame_;
  double margin_ = 0.0;
  int res_ = 0;
  std::vector<Tile> tiles_;
};

enum class Location { Interior, Boundary, Exterior };

/// Locates `p` against an areal geometry. Points within kEpsilon of the
/// boundary report Boundary.
Location locate(const Point& p, const Geometry& areal);

// ---------------------------------------------------------------------------
// Predicates (`b` must be areal)

TopoSet relate(const Geometry& a, const Geometry& b);

/// A is enclosed in B: A ⊆ B and the interiors meet.
bool within(const Geometry& a, const Geometry& b);
/// covers(A, B) == within(B, A).
bool covers(const Geometry& a, const Geometry& b);

// ---------------------------------------------------------------------------
// Boolean operations on areal geometries

MultiPolygon intersection(const Geometry& a, const Geometry& b);
/// Areal `a` clipped to a box. Vertices on the box edges stay exactly on them.
MultiPolygon intersection(const Geometry& a, const Box& box);
MultiPolygon difference(const Geometry& a, const Geometry& b);
MultiPolygon union_all(std::span<const Geometry> gs);
MultiPolygon union_all(std::span<const MultiPolygon> gs);

/// The part of `a` inside `box` as a list of pieces of the same dimension
/// (points, polylines, polygons). Empty when `a` misses the box.
std::vector<Geometry> clip_to_box(const Geometry& a, const Box& box);

// ---------------------------------------------------------------------------
// Buffering

inline constexpr int kDefaultSegmentsPerQuarter = 8;

/// Upper bound on the gap between the true buffer boundary and the
/// polygonal approximation: theta * (1 - cos(pi / (2 * segments_per_quarter))).
double buffer_chord_error(double theta, int segments_per_quarter = kDefaultSegmentsPerQuarter);

/// Minkowski sum of `g` with a disk of radius `theta`, approximated by
/// inscribed arcs with `segments_per_quarter` chords per quarter circle.
MultiPolygon buffer(const Geometry& g, double theta,
                    int segments_per_quarter = kDefaultSegmentsPerQuarter);

}  // namespace masklink::geom
