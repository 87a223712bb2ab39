// Boolean operations and buffering, backed by Boost.Geometry overlay.

#include <cmath>
#include <numbers>

#include "masklink/geom.hpp"

namespace masklink::geom {

namespace {

MultiPolygon as_multi(const Geometry& g) {
  if (const auto* p = std::get_if<Polygon>(&g)) return MultiPolygon{*p};
  if (const auto* mp = std::get_if<MultiPolygon>(&g)) return *mp;
  throw Error(ErrorCode::InvalidGeometry,
              std::string("boolean operation needs areal input, got ") + type_name(g));
}

double ring_area_abs(const Ring& r) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < r.size(); ++i) s += r[i].x * r[i + 1].y - r[i + 1].x * r[i].y;
  return std::abs(0.5 * s);
}

// Drops slivers: parts and holes whose area is below kSliverArea.
MultiPolygon clean(MultiPolygon mp) {
  MultiPolygon out;
  out.reserve(mp.size());
  for (auto& p : mp) {
    if (p.outer().size() < 4 || ring_area_abs(p.outer()) < kSliverArea) continue;
    auto& holes = p.inners();
    holes.erase(std::remove_if(holes.begin(), holes.end(),
                               [](const Ring& h) { return h.size() < 4 || ring_area_abs(h) < kSliverArea; }),
                holes.end());
    if (area(p) < kSliverArea) continue;
    out.push_back(std::move(p));
  }
  return out;
}

template <typename Op>
MultiPolygon run_overlay(const char* name, Op&& op) {
  try {
    MultiPolygon out;
    op(out);
    return clean(std::move(out));
  } catch (const bg::exception& e) {
    throw Error(ErrorCode::InvalidGeometry, std::string(name) + " failed: " + e.what());
  }
}

MultiPolygon union_pair(const MultiPolygon& a, const MultiPolygon& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  return run_overlay("union", [&](MultiPolygon& out) { bg::union_(a, b, out); });
}

// Balanced pairwise reduction keeps intermediate results small.
MultiPolygon pairwise_union(std::vector<MultiPolygon> parts) {
  if (parts.empty()) return {};
  while (parts.size() > 1) {
    std::vector<MultiPolygon> next;
    next.reserve((parts.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < parts.size(); i += 2) {
      next.push_back(union_pair(parts[i], parts[i + 1]));
    }
    if (parts.size() % 2 == 1) next.push_back(std::move(parts.back()));
    parts = std::move(next);
  }
  return std::move(parts.front());
}

// Parts whose closed envelopes are apart cannot interact, so only groups
// linked by envelope contact go through the overlay.
MultiPolygon cascaded_union(std::vector<MultiPolygon> parts) {
  const std::size_t n = parts.size();
  std::vector<Box> boxes(n);
  for (std::size_t i = 0; i < n; ++i) bg::envelope(parts[i], boxes[i]);
  std::vector<std::size_t> root(n);
  for (std::size_t i = 0; i < n; ++i) root[i] = i;
  auto find = [&](std::size_t i) {
    while (root[i] != i) i = root[i] = root[root[i]];
    return i;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (boxes_intersect(boxes[i], boxes[j])) root[find(i)] = find(j);
    }
  }
  std::vector<std::vector<MultiPolygon>> groups(n);
  for (std::size_t i = 0; i < n; ++i) groups[find(i)].push_back(std::move(parts[i]));
  MultiPolygon out;
  for (auto& g : groups) {
    if (g.empty()) continue;
    MultiPolygon merged = g.size() == 1 ? std::move(g.front()) : pairwise_union(std::move(g));
    for (auto& poly : merged) out.push_back(std::move(poly));
  }
  return out;
}

bool point_in_box(const Point& p, const Box& b) {
  return b.min_corner().x <= p.x && p.x <= b.max_corner().x && b.min_corner().y <= p.y &&
         p.y <= b.max_corner().y;
}

// Liang-Barsky; returns false when the segment misses the closed box.
bool clip_segment(const Point& p0, const Point& p1, const Box& box, Point& out0, Point& out1) {
  const double dx = p1.x - p0.x;
  const double dy = p1.y - p0.y;
  double t0 = 0.0;
  double t1 = 1.0;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {p0.x - box.min_corner().x, box.max_corner().x - p0.x,
                       p0.y - box.min_corner().y, box.max_corner().y - p0.y};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return false;
      continue;
    }
    const double r = q[i] / p[i];
    if (p[i] < 0.0) {
      if (r > t1) return false;
      t0 = std::max(t0, r);
    } else {
      if (r < t0) return false;
      t1 = std::min(t1, r);
    }
  }
  out0 = t0 == 0.0 ? p0 : Point{p0.x + t0 * dx, p0.y + t0 * dy};
  out1 = t1 == 1.0 ? p1 : Point{p0.x + t1 * dx, p0.y + t1 * dy};
  return true;
}

void clip_path(const std::vector<Point>& path, const Box& box, std::vector<Geometry>& out) {
  PolyLine current;
  auto flush = [&]() {
    if (current.size() >= 2) {
      out.emplace_back(std::move(current));
    } else if (current.size() == 1) {
      out.emplace_back(current.front());
    }
    current.clear();
  };
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    Point a;
    Point b;
    if (!clip_segment(path[i], path[i + 1], box, a, b)) {
      flush();
      continue;
    }
    if (current.empty()) {
      current.push_back(a);
    } else if (!(current.back() == a)) {
      flush();
      current.push_back(a);
    }
    if (!(b == current.back())) current.push_back(b);
    if (!(b == path[i + 1])) flush();
  }
  flush();
}

bool box_within(const Box& inner, const Box& outer) {
  return outer.min_corner().x <= inner.min_corner().x &&
         inner.max_corner().x <= outer.max_corner().x &&
         outer.min_corner().y <= inner.min_corner().y &&
         inner.max_corner().y <= outer.max_corner().y;
}

}  // namespace

MultiPolygon intersection(const Geometry& a, const Geometry& b) {
  const MultiPolygon ma = as_multi(a);
  const MultiPolygon mb = as_multi(b);
  Box ea;
  Box eb;
  bg::envelope(ma, ea);
  bg::envelope(mb, eb);
  if (!boxes_intersect(ea, eb)) return {};
  return run_overlay("intersection", [&](MultiPolygon& out) { bg::intersection(ma, mb, out); });
}

MultiPolygon intersection(const Geometry& a, const Box& box) {
  MultiPolygon ma = as_multi(a);
  Box ea;
  bg::envelope(ma, ea);
  if (!boxes_intersect(ea, box)) return {};
  if (box_within(ea, box)) return clean(std::move(ma));
  // Polygon-box clipping avoids the rescaled general overlay, which can
  // move clipped vertices off the box edges.
  return run_overlay("intersection", [&](MultiPolygon& out) {
    for (const auto& part : ma) {
      MultiPolygon piece;
      bg::intersection(part, box, piece);
      for (auto& p : piece) out.push_back(std::move(p));
    }
  });
}

MultiPolygon difference(const Geometry& a, const Geometry& b) {
  const MultiPolygon ma = as_multi(a);
  const MultiPolygon mb = as_multi(b);
  if (mb.empty()) return clean(ma);
  Box ea;
  Box eb;
  bg::envelope(ma, ea);
  bg::envelope(mb, eb);
  if (!boxes_intersect(ea, eb)) return clean(ma);
  return run_overlay("difference", [&](MultiPolygon& out) { bg::difference(ma, mb, out); });
}

MultiPolygon union_all(std::span<const Geometry> gs) {
  std::vector<MultiPolygon> parts;
  parts.reserve(gs.size());
  for (const auto& g : gs) parts.push_back(as_multi(g));
  return cascaded_union(std::move(parts));
}

MultiPolygon union_all(std::span<const MultiPolygon> gs) {
  return cascaded_union(std::vector<MultiPolygon>(gs.begin(), gs.end()));
}

std::vector<Geometry> clip_to_box(const Geometry& a, const Box& box) {
  std::vector<Geometry> out;
  if (const auto* p = std::get_if<Point>(&a)) {
    if (point_in_box(*p, box)) out.emplace_back(*p);
    return out;
  }
  const Box env = envelope(a);
  if (!boxes_intersect(env, box)) return out;
  if (box_within(env, box)) {
    out.push_back(a);
    return out;
  }
  if (const auto* l = std::get_if<PolyLine>(&a)) {
    clip_path(std::vector<Point>(l->begin(), l->end()), box, out);
    return out;
  }
  MultiPolygon clipped = intersection(a, box);
  if (!clipped.empty()) {
    out.emplace_back(std::move(clipped));
    return out;
  }
  // Contact along the box edge only: keep the lower-dimensional pieces.
  const MultiPolygon parts = as_multi(a);
  for (const auto& poly : parts) {
    clip_path(std::vector<Point>(poly.outer().begin(), poly.outer().end()), box, out);
    for (const auto& h : poly.inners()) clip_path(std::vector<Point>(h.begin(), h.end()), box, out);
  }
  return out;
}

double buffer_chord_error(double theta, int segments_per_quarter) {
  return theta * (1.0 - std::cos(std::numbers::pi / (2.0 * segments_per_quarter)));
}

MultiPolygon buffer(const Geometry& g, double theta, int segments_per_quarter) {
  if (!(theta > 0.0)) {
    throw Error(ErrorCode::NonPositiveTheta, "buffer distance must be positive");
  }
  if (segments_per_quarter < 1) {
    throw Error(ErrorCode::DomainError, "segments_per_quarter must be >= 1");
  }
  const int per_circle = 4 * segments_per_quarter;
  bg::strategy::buffer::distance_symmetric<double> dist(theta);
  bg::strategy::buffer::join_round join(per_circle);
  bg::strategy::buffer::end_round end(per_circle);
  bg::strategy::buffer::point_circle circle(per_circle);
  bg::strategy::buffer::side_straight side;
  return run_overlay("buffer", [&](MultiPolygon& out) {
    std::visit([&](const auto& x) { bg::buffer(x, out, dist, side, join, end, circle); }, g);
  });
}

}  // namespace masklink::geom
