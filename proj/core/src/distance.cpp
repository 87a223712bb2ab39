#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "masklink/geom.hpp"

namespace masklink::geom {

namespace {

struct Segment {
  Point a;
  Point b;
};

double orient(const Point& a, const Point& b, const Point& c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

bool on_segment_collinear(const Point& a, const Point& b, const Point& p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
         std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

bool segments_intersect(const Segment& s, const Segment& t) {
  const double d1 = orient(t.a, t.b, s.a);
  const double d2 = orient(t.a, t.b, s.b);
  const double d3 = orient(s.a, s.b, t.a);
  const double d4 = orient(s.a, s.b, t.b);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
      ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  if (d1 == 0 && on_segment_collinear(t.a, t.b, s.a)) return true;
  if (d2 == 0 && on_segment_collinear(t.a, t.b, s.b)) return true;
  if (d3 == 0 && on_segment_collinear(s.a, s.b, t.a)) return true;
  if (d4 == 0 && on_segment_collinear(s.a, s.b, t.b)) return true;
  return false;
}

double point_segment(const Point& p, const Segment& s) {
  const double dx = s.b.x - s.a.x;
  const double dy = s.b.y - s.a.y;
  const double len2 = dx * dx + dy * dy;
  if (len2 == 0.0) return std::hypot(p.x - s.a.x, p.y - s.a.y);
  double t = ((p.x - s.a.x) * dx + (p.y - s.a.y) * dy) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (s.a.x + t * dx), p.y - (s.a.y + t * dy));
}

double segment_segment(const Segment& s, const Segment& t) {
  if (segments_intersect(s, t)) return 0.0;
  return std::min({point_segment(s.a, t), point_segment(s.b, t), point_segment(t.a, s),
                   point_segment(t.b, s)});
}

Box segment_box(const Segment& s) {
  return Box{{std::min(s.a.x, s.b.x), std::min(s.a.y, s.b.y)},
             {std::max(s.a.x, s.b.x), std::max(s.a.y, s.b.y)}};
}

// One connected piece of a geometry: a point, a polyline or a polygon.
// Edges are visited in place; a point is a single degenerate segment.
struct Component {
  const Point* point = nullptr;
  const PolyLine* line = nullptr;
  const Polygon* polygon = nullptr;
  Point anchor;
  Box box;

  template <typename F>
  void for_each_segment(F&& f) const {
    auto ring = [&](const auto& r) {
      for (std::size_t i = 0; i + 1 < r.size(); ++i) f(Segment{r[i], r[i + 1]});
    };
    if (point) {
      f(Segment{*point, *point});
    } else if (line) {
      if (line->size() == 1) f(Segment{line->front(), line->front()});
      ring(*line);
    } else {
      ring(polygon->outer());
      for (const auto& h : polygon->inners()) ring(h);
    }
  }
};

Component polygon_component(const Polygon& p) {
  Component c;
  c.polygon = &p;
  c.anchor = p.outer().front();
  bg::envelope(p, c.box);
  return c;
}

template <typename F>
void for_each_component(const Geometry& g, F&& f) {
  if (const auto* p = std::get_if<Point>(&g)) {
    Component c;
    c.point = p;
    c.anchor = *p;
    c.box = Box{*p, *p};
    f(c);
  } else if (const auto* l = std::get_if<PolyLine>(&g)) {
    Component c;
    c.line = l;
    c.anchor = l->front();
    bg::envelope(*l, c.box);
    f(c);
  } else if (const auto* poly = std::get_if<Polygon>(&g)) {
    f(polygon_component(*poly));
  } else {
    for (const auto& part : std::get<MultiPolygon>(g)) f(polygon_component(part));
  }
}

std::vector<Component> components(const Geometry& g) {
  std::vector<Component> out;
  for_each_component(g, [&](const Component& c) { out.push_back(c); });
  return out;
}

// Strict crossing-number test; callers handle the boundary separately.
bool ring_contains(const Ring& r, const Point& p) {
  bool inside = false;
  for (std::size_t i = 0, j = r.size() - 1; i < r.size(); j = i++) {
    const Point& a = r[i];
    const Point& b = r[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

bool polygon_contains(const Polygon& poly, const Point& p) {
  if (!ring_contains(poly.outer(), p)) return false;
  for (const auto& h : poly.inners()) {
    if (ring_contains(h, p)) return false;
  }
  return true;
}

Location locate_in_polygon(const Point& p, const Polygon& poly) {
  Box b;
  bg::envelope(poly, b);
  if (!boxes_intersect(b, Box{p, p}, kEpsilon)) return Location::Exterior;
  auto near = [&](const Ring& r) {
    for (std::size_t i = 0; i + 1 < r.size(); ++i) {
      if (point_segment(p, {r[i], r[i + 1]}) <= kEpsilon) return true;
    }
    return false;
  };
  if (near(poly.outer())) return Location::Boundary;
  for (const auto& h : poly.inners()) {
    if (near(h)) return Location::Boundary;
  }
  return polygon_contains(poly, p) ? Location::Interior : Location::Exterior;
}

// Returns min(best, distance(a, b)); exits early once the result drops to
// `stop_at`. Pairs no closer than `best` are skipped without refinement.
double component_distance(const Component& a, const Component& b, double best, double stop_at) {
  if (box_distance(a.box, b.box) >= best) return best;
  if (a.polygon && polygon_contains(*a.polygon, b.anchor)) return 0.0;
  if (b.polygon && polygon_contains(*b.polygon, a.anchor)) return 0.0;
  bool done = false;
  a.for_each_segment([&](const Segment& s) {
    if (done) return;
    const Box sb = segment_box(s);
    if (box_distance(sb, b.box) >= best) return;
    b.for_each_segment([&](const Segment& t) {
      if (done || box_distance(sb, segment_box(t)) >= best) return;
      const double d = segment_segment(s, t);
      if (d < best) {
        best = d;
        done = best <= stop_at;
      }
    });
  });
  return best;
}

// `cap` bounds the search: results at or beyond it are reported as `cap`.
double distance_impl(const Geometry& a, const Geometry& b, double stop_at, double cap) {
  const auto ca = components(a);
  double best = cap;
  for_each_component(b, [&](const Component& y) {
    for (const auto& x : ca) {
      if (best <= stop_at) return;
      best = component_distance(x, y, best, stop_at);
    }
  });
  return best;
}

void flatten(const Geometry& g, std::vector<double>& out) {
  std::visit(
      [&](const auto& x) {
        bg::for_each_point(x, [&](const Point& p) {
          out.push_back(p.x);
          out.push_back(p.y);
        });
      },
      g);
}

// Total order used to evaluate distance(a, b) and distance(b, a) through
// the exact same sequence of floating point operations.
bool canonical_less(const Geometry& a, const Geometry& b) {
  if (a.index() != b.index()) return a.index() < b.index();
  const Box ba = envelope(a);
  const Box bb = envelope(b);
  const auto key = [](const Box& x) {
    return std::tuple(x.min_corner().x, x.min_corner().y, x.max_corner().x, x.max_corner().y);
  };
  if (key(ba) != key(bb)) return key(ba) < key(bb);
  std::vector<double> fa;
  std::vector<double> fb;
  flatten(a, fa);
  flatten(b, fb);
  return fa < fb;
}

}  // namespace

double euclidean(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

double distance(const Point& a, const Point& b, const PointMetric& metric) {
  return metric ? metric(a, b) : euclidean(a, b);
}

double distance(const Geometry& a, const Geometry& b) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  return canonical_less(b, a) ? distance_impl(b, a, 0.0, kInf) : distance_impl(a, b, 0.0, kInf);
}

bool within_distance(const Geometry& a, const Geometry& b, double limit) {
  if (box_distance(envelope(a), envelope(b)) > limit) return false;
  const double cap = std::nextafter(limit, std::numeric_limits<double>::infinity());
  return distance_impl(a, b, limit, cap) <= limit;
}

PreparedAreal::PreparedAreal(MultiPolygon mp) : mp_(std::move(mp)) {
  boxes_.reserve(mp_.size());
  for (const auto& part : mp_) {
    Box b;
    bg::envelope(part, b);
    boxes_.push_back(b);
  }
  if (!boxes_.empty()) bg::envelope(mp_, env_);
}

PreparedAreal::PreparedAreal(MultiPolygon mp, const Box& frame, double margin, int resolution)
    : PreparedAreal(std::move(mp)) {
  if (resolution > 0 && margin >= 0.0) rasterize(frame, margin, resolution);
}

void PreparedAreal::rasterize(const Box& frame, double margin, int n) {
  const double x0 = frame.min_corner().x;
  const double y0 = frame.min_corner().y;
  const double w = (frame.max_corner().x - x0) / n;
  const double h = (frame.max_corner().y - y0) / n;
  if (!(w > 0.0 && h > 0.0) || !std::isfinite(w) || !std::isfinite(h)) return;
  frame_ = frame;
  margin_ = margin;
  res_ = n;
  tiles_.assign(static_cast<std::size_t>(n) * n, Tile::Unknown);

  // Slack absorbs rounding in the index arithmetic.
  const double sx = margin + 1e-6 * w;
  const double sy = margin + 1e-6 * h;
  auto index = [n](double v, double origin, double step) {
    return std::clamp(static_cast<int>(std::floor((v - origin) / step)), 0, n - 1);
  };
  auto mark = [&](const Point& p, const Point& q) {
    const int c0 = index(std::min(p.x, q.x) - sx, x0, w);
    const int c1 = index(std::max(p.x, q.x) + sx, x0, w);
    const int r0 = index(std::min(p.y, q.y) - sy, y0, h);
    const int r1 = index(std::max(p.y, q.y) + sy, y0, h);
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) tiles_[static_cast<std::size_t>(r) * n + c] = Tile::Mixed;
    }
  };
  std::vector<const Ring*> rings;
  for (const auto& part : mp_) {
    rings.push_back(&part.outer());
    for (const auto& hole : part.inners()) rings.push_back(&hole);
  }
  for (const Ring* ring : rings) {
    const Ring& r = *ring;
    for (std::size_t i = 0; i + 1 < r.size(); ++i) {
      // Long edges are split so the marked boxes hug the edge.
      const Point a = r[i];
      const Point b = r[i + 1];
      const int pieces =
          1 + static_cast<int>(std::max(std::abs(b.x - a.x) / w, std::abs(b.y - a.y) / h));
      Point prev = a;
      for (int k = 1; k <= pieces; ++k) {
        const double t = static_cast<double>(k) / pieces;
        const Point next = k == pieces ? b : Point{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
        mark(prev, next);
        prev = next;
      }
    }
  }

  // Tiles with no boundary nearby are uniformly inside or outside; the
  // crossing parity along the row through their centers decides which.
  std::vector<double> xs;
  for (int row = 0; row < n; ++row) {
    const double y = y0 + (row + 0.5) * h;
    xs.clear();
    for (const Ring* ring : rings) {
      const Ring& r = *ring;
      for (std::size_t i = 0; i + 1 < r.size(); ++i) {
        const Point& a = r[i];
        const Point& b = r[i + 1];
        if ((a.y > y) != (b.y > y)) xs.push_back(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
      }
    }
    std::sort(xs.begin(), xs.end());
    for (int col = 0; col < n; ++col) {
      Tile& tile = tiles_[static_cast<std::size_t>(row) * n + col];
      if (tile != Tile::Unknown) continue;
      const double x = x0 + (col + 0.5) * w;
      const auto crossings = std::lower_bound(xs.begin(), xs.end(), x) - xs.begin();
      tile = crossings % 2 == 1 ? Tile::Inside : Tile::Clear;
    }
  }
}

// Clear when every tile under `query` is clear of the region (by more than
// the margin), inside when every tile lies in its interior.
std::optional<bool> PreparedAreal::classify(const Box& query) const {
  const Box& f = frame_;
  if (query.min_corner().x < f.min_corner().x || query.min_corner().y < f.min_corner().y ||
      query.max_corner().x > f.max_corner().x || query.max_corner().y > f.max_corner().y) {
    return std::nullopt;
  }
  const double w = (f.max_corner().x - f.min_corner().x) / res_;
  const double h = (f.max_corner().y - f.min_corner().y) / res_;
  auto index = [this](double v, double origin, double step, double slack) {
    return std::clamp(static_cast<int>(std::floor((v - origin) / step + slack)), 0, res_ - 1);
  };
  const int c0 = index(query.min_corner().x, f.min_corner().x, w, -1e-6);
  const int c1 = index(query.max_corner().x, f.min_corner().x, w, 1e-6);
  const int r0 = index(query.min_corner().y, f.min_corner().y, h, -1e-6);
  const int r1 = index(query.max_corner().y, f.min_corner().y, h, 1e-6);
  const Tile first = tiles_[static_cast<std::size_t>(r0) * res_ + c0];
  if (first == Tile::Mixed) return std::nullopt;
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      if (tiles_[static_cast<std::size_t>(r) * res_ + c] != first) return std::nullopt;
    }
  }
  return first == Tile::Inside;
}

bool PreparedAreal::within_distance(const Geometry& a, double limit) const {
  const Box ea = masklink::geom::envelope(a);
  if (mp_.empty() || box_distance(ea, env_) > limit) return false;
  if (!tiles_.empty() && limit <= margin_) {
    if (const auto known = classify(ea)) return *known;
  }
  const double cap = std::nextafter(limit, std::numeric_limits<double>::infinity());
  const auto ca = components(a);
  for (std::size_t i = 0; i < mp_.size(); ++i) {
    if (box_distance(ea, boxes_[i]) > limit) continue;
    Component y;
    y.polygon = &mp_[i];
    y.anchor = mp_[i].outer().front();
    y.box = boxes_[i];
    for (const auto& x : ca) {
      if (component_distance(x, y, cap, limit) <= limit) return true;
    }
  }
  return false;
}

Location locate(const Point& p, const Geometry& areal) {
  if (const auto* poly = std::get_if<Polygon>(&areal)) return locate_in_polygon(p, *poly);
  if (const auto* mp = std::get_if<MultiPolygon>(&areal)) {
    Location result = Location::Exterior;
    for (const auto& part : *mp) {
      const Location l = locate_in_polygon(p, part);
      if (l == Location::Boundary) return l;
      if (l == Location::Interior) result = l;
    }
    return result;
  }
  throw Error(ErrorCode::UnsupportedPair, "locate requires an areal geometry");
}

}  // namespace masklink::geom
