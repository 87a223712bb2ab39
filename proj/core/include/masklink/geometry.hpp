#pragma once

// Planar geometry model shared by every module. Coordinates are plain
// doubles (degrees or abstract units); no CRS handling.

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/register/point.hpp>

#include <variant>
#include <vector>

#include "masklink/error.hpp"

namespace masklink::geom {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

}  // namespace masklink::geom

BOOST_GEOMETRY_REGISTER_POINT_2D(masklink::geom::Point, double,
                                 boost::geometry::cs::cartesian, x, y)

namespace masklink::geom {

namespace bg = boost::geometry;

using PolyLine = bg::model::linestring<Point>;
// Counter-clockwise exterior, clockwise holes, closed rings.
using Ring = bg::model::ring<Point, false, true>;
using Polygon = bg::model::polygon<Point, false, true>;
using MultiPolygon = bg::model::multi_polygon<Polygon>;
using Box = bg::model::box<Point>;

using Geometry = std::variant<Point, PolyLine, Polygon, MultiPolygon>;

/// Area tolerance below which boolean-op output parts are discarded.
inline constexpr double kSliverArea = 1e-12;
/// Distance tolerance used by the topological predicates.
inline constexpr double kEpsilon = 1e-9;

inline bool is_areal(const Geometry& g) {
  return std::holds_alternative<Polygon>(g) ||
         std::holds_alternative<MultiPolygon>(g);
}

const char* type_name(const Geometry& g);

Box envelope(const Geometry& g);
bool is_empty(const Geometry& g);

/// Squared-free gap between two boxes (0 when they touch or overlap).
double box_distance(const Box& a, const Box& b);
bool boxes_intersect(const Box& a, const Box& b, double tolerance = 0.0);
Box expand(const Box& b, double by);
Polygon to_polygon(const Box& b);

/// Shoelace area with holes subtracted. Throws InvalidGeometry for
/// non-areal input.
double area(const Geometry& g);
double area(const Polygon& p);
double area(const MultiPolygon& mp);

/// Checks the type invariants (finite coordinates, closed simple rings,
/// holes inside the exterior, no repeated consecutive polyline vertices).
/// Throws Error{ValidationError} describing the first violation.
void validate(const Geometry& g);

/// Fixes ring orientation in place (exterior CCW, holes CW). Rings must
/// already be closed.
void normalize(Geometry& g);

/// Convenience: normalize then validate.
Geometry make_valid_checked(Geometry g);

Polygon make_box_polygon(double minx, double miny, double maxx, double maxy);

}  // namespace masklink::geom
