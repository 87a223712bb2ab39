#include <algorithm>
#include <cmath>

#include "masklink/geom.hpp"

namespace masklink::geom {

const char* to_string(Topo t) noexcept {
  switch (t) {
    case Topo::Within: return "within";
    case Topo::Covers: return "covers";
    case Topo::Overlaps: return "overlaps";
    case Topo::Meets: return "meets";
    case Topo::Disjoint: return "disjoint";
  }
  return "?";
}

std::string to_string(TopoSet s) {
  std::string out = "{";
  s.for_each([&](Topo t) {
    if (out.size() > 1) out += ",";
    out += to_string(t);
  });
  return out + "}";
}

namespace {

double cross(double ax, double ay, double bx, double by) { return ax * by - ay * bx; }

// Parameters along p0->p1 where the segment meets an edge of `ring`.
void ring_hits(const Point& p0, const Point& p1, const Ring& ring, std::vector<double>& params) {
  const double rx = p1.x - p0.x;
  const double ry = p1.y - p0.y;
  const double rr = rx * rx + ry * ry;
  const Box seg{{std::min(p0.x, p1.x), std::min(p0.y, p1.y)},
                {std::max(p0.x, p1.x), std::max(p0.y, p1.y)}};
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    const Point& q0 = ring[i];
    const Point& q1 = ring[i + 1];
    const Box edge{{std::min(q0.x, q1.x), std::min(q0.y, q1.y)},
                   {std::max(q0.x, q1.x), std::max(q0.y, q1.y)}};
    if (!boxes_intersect(seg, edge, kEpsilon)) continue;
    const double ux = q1.x - q0.x;
    const double uy = q1.y - q0.y;
    const double wx = q0.x - p0.x;
    const double wy = q0.y - p0.y;
    const double denom = cross(rx, ry, ux, uy);
    if (denom != 0.0) {
      const double s = cross(wx, wy, ux, uy) / denom;
      const double u = cross(wx, wy, rx, ry) / denom;
      if (s >= 0.0 && s <= 1.0 && u >= 0.0 && u <= 1.0) params.push_back(s);
    } else if (cross(wx, wy, rx, ry) == 0.0) {
      // Collinear: the overlap endpoints split the segment.
      const double s0 = (wx * rx + wy * ry) / rr;
      const double s1 = ((q1.x - p0.x) * rx + (q1.y - p0.y) * ry) / rr;
      if (s0 >= 0.0 && s0 <= 1.0) params.push_back(s0);
      if (s1 >= 0.0 && s1 <= 1.0) params.push_back(s1);
    }
  }
}

template <typename F>
void for_each_ring(const Geometry& areal, F&& f) {
  auto visit_polygon = [&](const Polygon& p) {
    f(p.outer());
    for (const auto& h : p.inners()) f(h);
  };
  if (const auto* p = std::get_if<Polygon>(&areal)) {
    visit_polygon(*p);
  } else {
    for (const auto& part : std::get<MultiPolygon>(areal)) visit_polygon(part);
  }
}

TopoSet relate_point(const Point& p, const Geometry& b) {
  switch (locate(p, b)) {
    case Location::Interior: return {Topo::Within};
    case Location::Boundary: return {Topo::Meets};
    case Location::Exterior: return {Topo::Disjoint};
  }
  return {Topo::Disjoint};
}

// Splits the polyline at every contact with the boundary of `b` and
// classifies each piece by its midpoint.
TopoSet relate_polyline(const PolyLine& line, const Geometry& b, const Box& b_env) {
  bool has_in = false;
  bool has_out = false;
  bool has_on = false;
  std::vector<double> params;
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    const Point& p0 = line[i];
    const Point& p1 = line[i + 1];
    params.clear();
    params.push_back(0.0);
    params.push_back(1.0);
    const Box seg{{std::min(p0.x, p1.x), std::min(p0.y, p1.y)},
                  {std::max(p0.x, p1.x), std::max(p0.y, p1.y)}};
    if (boxes_intersect(seg, b_env, kEpsilon)) {
      for_each_ring(b, [&](const Ring& r) { ring_hits(p0, p1, r, params); });
    }
    std::sort(params.begin(), params.end());
    params.erase(std::unique(params.begin(), params.end()), params.end());
    for (std::size_t k = 0; k + 1 < params.size(); ++k) {
      const double t = 0.5 * (params[k] + params[k + 1]);
      const Point mid{p0.x + t * (p1.x - p0.x), p0.y + t * (p1.y - p0.y)};
      switch (locate(mid, b)) {
        case Location::Interior: has_in = true; break;
        case Location::Exterior: has_out = true; break;
        case Location::Boundary: has_on = true; break;
      }
    }
  }
  if (has_in) return has_out ? TopoSet{Topo::Overlaps} : TopoSet{Topo::Within};
  if (has_on || within_distance(Geometry{line}, b, kEpsilon)) return {Topo::Meets};
  return {Topo::Disjoint};
}

TopoSet relate_areal(const Geometry& a, const Geometry& b) {
  const double area_a = area(a);
  const double area_b = area(b);
  const double shared = area(intersection(a, b));
  const double floor_shared = std::max(kSliverArea, 1e-9 * std::min(area_a, area_b));
  if (shared <= floor_shared) {
    return within_distance(a, b, kEpsilon) ? TopoSet{Topo::Meets} : TopoSet{Topo::Disjoint};
  }
  TopoSet out;
  if (area_a - shared <= std::max(kSliverArea, 1e-9 * area_a)) out.insert(Topo::Within);
  if (area_b - shared <= std::max(kSliverArea, 1e-9 * area_b)) out.insert(Topo::Covers);
  if (out.empty()) out.insert(Topo::Overlaps);
  return out;
}

}  // namespace

TopoSet relate(const Geometry& a, const Geometry& b) {
  if (!is_areal(b)) {
    throw Error(ErrorCode::UnsupportedPair,
                std::string("relate needs an areal right-hand side, got ") + type_name(b));
  }
  const Box eb = envelope(b);
  if (box_distance(envelope(a), eb) > kEpsilon) return {Topo::Disjoint};
  if (const auto* p = std::get_if<Point>(&a)) return relate_point(*p, b);
  if (const auto* l = std::get_if<PolyLine>(&a)) return relate_polyline(*l, b, eb);
  return relate_areal(a, b);
}

bool within(const Geometry& a, const Geometry& b) { return relate(a, b).contains(Topo::Within); }

bool covers(const Geometry& a, const Geometry& b) {
  if (!is_areal(a)) {
    // Only an areal geometry can enclose an areal one.
    if (!is_areal(b)) throw Error(ErrorCode::UnsupportedPair, "covers needs an areal operand");
    return false;
  }
  return within(b, a);
}

}  // namespace masklink::geom
