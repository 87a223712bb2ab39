#include "masklink/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace masklink {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidGeometry: return "InvalidGeometry";
    case ErrorCode::UnsupportedPair: return "UnsupportedPair";
    case ErrorCode::NonPositiveTheta: return "NonPositiveTheta";
    case ErrorCode::EmptyTargetSet: return "EmptyTargetSet";
    case ErrorCode::ThetaMismatch: return "ThetaMismatch";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::UsageError: return "UsageError";
  }
  return "Unknown";
}

}  // namespace masklink

namespace masklink::geom {

namespace {

template <typename... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <typename... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double ring_signed_area(const Ring& r) {
  // Shoelace over the closed ring.
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < r.size(); ++i) {
    sum += r[i].x * r[i + 1].y - r[i + 1].x * r[i].y;
  }
  return 0.5 * sum;
}

[[noreturn]] void invalid(const std::string& what) {
  throw Error(ErrorCode::ValidationError, what);
}

void check_finite(const Point& p) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) invalid("non-finite coordinate");
}

void check_ring(const Ring& r, const char* which) {
  if (r.size() < 4) invalid(std::string(which) + " ring has fewer than 4 points");
  if (!(r.front() == r.back())) invalid(std::string(which) + " ring is not closed");
  for (const auto& p : r) check_finite(p);
}

}  // namespace

const char* type_name(const Geometry& g) {
  return std::visit(Overloaded{
                        [](const Point&) { return "Point"; },
                        [](const PolyLine&) { return "PolyLine"; },
                        [](const Polygon&) { return "Polygon"; },
                        [](const MultiPolygon&) { return "MultiPolygon"; },
                    },
                    g);
}

Box envelope(const Geometry& g) {
  return std::visit(
      [](const auto& x) {
        Box b;
        bg::envelope(x, b);
        return b;
      },
      g);
}

bool is_empty(const Geometry& g) {
  return std::visit(Overloaded{
                        [](const Point&) { return false; },
                        [](const PolyLine& l) { return l.empty(); },
                        [](const Polygon& p) { return p.outer().empty(); },
                        [](const MultiPolygon& mp) { return mp.empty(); },
                    },
                    g);
}

double box_distance(const Box& a, const Box& b) {
  const double dx = std::max({0.0, b.min_corner().x - a.max_corner().x,
                              a.min_corner().x - b.max_corner().x});
  const double dy = std::max({0.0, b.min_corner().y - a.max_corner().y,
                              a.min_corner().y - b.max_corner().y});
  if (dx == 0.0) return dy;
  if (dy == 0.0) return dx;
  return std::hypot(dx, dy);
}

bool boxes_intersect(const Box& a, const Box& b, double tolerance) {
  return a.min_corner().x <= b.max_corner().x + tolerance &&
         b.min_corner().x <= a.max_corner().x + tolerance &&
         a.min_corner().y <= b.max_corner().y + tolerance &&
         b.min_corner().y <= a.max_corner().y + tolerance;
}

Box expand(const Box& b, double by) {
  return Box{{b.min_corner().x - by, b.min_corner().y - by},
             {b.max_corner().x + by, b.max_corner().y + by}};
}

Polygon make_box_polygon(double minx, double miny, double maxx, double maxy) {
  Polygon p;
  p.outer() = {{minx, miny}, {maxx, miny}, {maxx, maxy}, {minx, maxy}, {minx, miny}};
  return p;
}

Polygon to_polygon(const Box& b) {
  return make_box_polygon(b.min_corner().x, b.min_corner().y, b.max_corner().x,
                          b.max_corner().y);
}

double area(const Polygon& p) {
  double a = std::abs(ring_signed_area(p.outer()));
  for (const auto& hole : p.inners()) a -= std::abs(ring_signed_area(hole));
  return std::max(a, 0.0);
}

double area(const MultiPolygon& mp) {
  double a = 0.0;
  for (const auto& p : mp) a += area(p);
  return a;
}

double area(const Geometry& g) {
  return std::visit(Overloaded{
                        [](const Polygon& p) { return area(p); },
                        [](const MultiPolygon& mp) { return area(mp); },
                        [](const auto&) -> double {
                          throw Error(ErrorCode::InvalidGeometry, "area of a non-areal geometry");
                        },
                    },
                    g);
}

void normalize(Geometry& g) {
  auto fix = [](Polygon& p) {
    if (ring_signed_area(p.outer()) < 0) std::reverse(p.outer().begin(), p.outer().end());
    for (auto& hole : p.inners()) {
      if (ring_signed_area(hole) > 0) std::reverse(hole.begin(), hole.end());
    }
  };
  std::visit(Overloaded{
                 [&](Polygon& p) { fix(p); },
                 [&](MultiPolygon& mp) {
                   for (auto& p : mp) fix(p);
                 },
                 [](auto&) {},
             },
             g);
}

void validate(const Geometry& g) {
  auto check_polygon = [](const Polygon& p) {
    check_ring(p.outer(), "exterior");
    for (const auto& hole : p.inners()) check_ring(hole, "interior");
    if (std::abs(ring_signed_area(p.outer())) <= 0.0) invalid("exterior ring has zero area");
  };
  std::visit(Overloaded{
                 [](const Point& p) { check_finite(p); },
                 [](const PolyLine& l) {
                   if (l.size() < 2) invalid("polyline has fewer than 2 points");
                   for (std::size_t i = 0; i < l.size(); ++i) {
                     check_finite(l[i]);
                     if (i > 0 && l[i] == l[i - 1]) invalid("polyline repeats a vertex");
                   }
                 },
                 [&](const Polygon& p) {
                   check_polygon(p);
                   std::string reason;
                   if (!bg::is_valid(p, reason)) invalid(reason);
                 },
                 [&](const MultiPolygon& mp) {
                   if (mp.empty()) invalid("empty multipolygon");
                   for (const auto& p : mp) check_polygon(p);
                   std::string reason;
                   if (!bg::is_valid(mp, reason)) invalid(reason);
                 },
             },
             g);
}

Geometry make_valid_checked(Geometry g) {
  // Closure and ring size are checked before orientation is touched so that
  // unclosed input is rejected rather than silently closed.
  std::visit(Overloaded{
                 [](const Polygon& p) {
                   check_ring(p.outer(), "exterior");
                   for (const auto& h : p.inners()) check_ring(h, "interior");
                 },
                 [](const MultiPolygon& mp) {
                   for (const auto& p : mp) {
                     check_ring(p.outer(), "exterior");
                     for (const auto& h : p.inners()) check_ring(h, "interior");
                   }
                 },
                 [](const auto&) {},
             },
             g);
  normalize(g);
  validate(g);
  return g;
}

}  // namespace masklink::geom
