#include "masklink/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "masklink/wkt.hpp"

namespace masklink {

namespace {

double uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform(rng); }

// Unit-scale description of one polygon; the final radius is scale * rel.
struct Seed {
  geom::Point center;
  double rel = 1.0;
  TargetShape shape = TargetShape::Axis;
  double aspect = 1.0;
  double angle = 0.0;
  std::vector<double> radial;  // Noisy: per-vertex radius factors
  std::vector<double> angles;  // Noisy: vertex angles
};

Seed draw_seed(std::mt19937_64& rng, geom::Point center, double rel, TargetShape shape,
               const SynthOptions& o) {
  Seed s;
  s.center = center;
  s.rel = rel;
  s.shape = shape;
  if (shape == TargetShape::Mixed) {
    const double u = uniform(rng);
    s.shape = u < 1.0 / 3 ? TargetShape::Axis : u < 2.0 / 3 ? TargetShape::Rotated : TargetShape::Noisy;
  }
  const double log_aspect = std::log(o.max_aspect);
  s.aspect = std::exp(uniform(rng, -log_aspect, log_aspect));
  s.angle = uniform(rng, 0.0, std::numbers::pi);
  if (s.shape == TargetShape::Noisy) {
    const double step = 2.0 * std::numbers::pi / o.noisy_vertices;
    for (int i = 0; i < o.noisy_vertices; ++i) {
      s.angles.push_back(step * (i + uniform(rng, -0.4, 0.4)));
      s.radial.push_back(uniform(rng, 1.0 - o.noise_depth, 1.0));
    }
  }
  return s;
}

geom::Polygon build(const Seed& s, double scale) {
  const double r = scale * s.rel;
  geom::Polygon poly;
  auto& ring = poly.outer();
  if (s.shape == TargetShape::Noisy) {
    for (std::size_t i = 0; i < s.angles.size(); ++i) {
      const double rr = r * s.radial[i];
      ring.push_back({s.center.x + rr * std::cos(s.angles[i]), s.center.y + rr * std::sin(s.angles[i])});
    }
  } else {
    const double norm = std::sqrt(1.0 + s.aspect * s.aspect);
    const double hx = r * s.aspect / norm;
    const double hy = r / norm;
    const double phi = s.shape == TargetShape::Rotated ? s.angle : 0.0;
    const double c = std::cos(phi);
    const double sn = std::sin(phi);
    for (auto [dx, dy] : {std::pair{-hx, -hy}, {hx, -hy}, {hx, hy}, {-hx, hy}}) {
      ring.push_back({s.center.x + dx * c - dy * sn, s.center.y + dx * sn + dy * c});
    }
  }
  ring.push_back(ring.front());
  return poly;
}

Target make_target(std::size_t index, geom::Polygon poly) {
  Target t;
  t.id = "b" + std::to_string(index);
  t.geometry = geom::make_valid_checked(geom::Geometry{std::move(poly)});
  t.envelope = geom::envelope(t.geometry);
  return t;
}

// Even-odd crossing test over every ring; independent of the geometry kernel.
bool raster_inside(const geom::Polygon& poly, double x, double y) {
  bool inside = false;
  auto scan = [&](const auto& ring) {
    for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
      const auto& a = ring[i];
      const auto& b = ring[j];
      if ((a.y > y) != (b.y > y) && x < (b.x - a.x) * (y - a.y) / (b.y - a.y) + a.x) inside = !inside;
    }
  };
  scan(poly.outer());
  for (const auto& h : poly.inners()) scan(h);
  return inside;
}

void rasterize(const geom::Polygon& poly, const geom::Box& extent, int res, std::vector<char>& bits) {
  const double w = (extent.max_corner().x - extent.min_corner().x) / res;
  const double h = (extent.max_corner().y - extent.min_corner().y) / res;
  geom::Box env;
  geom::bg::envelope(poly, env);
  const int i0 = std::max(0, static_cast<int>(std::floor((env.min_corner().x - extent.min_corner().x) / w)));
  const int i1 = std::min(res - 1, static_cast<int>(std::floor((env.max_corner().x - extent.min_corner().x) / w)));
  const int j0 = std::max(0, static_cast<int>(std::floor((env.min_corner().y - extent.min_corner().y) / h)));
  const int j1 = std::min(res - 1, static_cast<int>(std::floor((env.max_corner().y - extent.min_corner().y) / h)));
  for (int j = j0; j <= j1; ++j) {
    const double y = extent.min_corner().y + (j + 0.5) * h;
    for (int i = i0; i <= i1; ++i) {
      char& bit = bits[static_cast<std::size_t>(j) * res + i];
      if (!bit && raster_inside(poly, extent.min_corner().x + (i + 0.5) * w, y)) bit = 1;
    }
  }
}

double covered_fraction(const std::vector<char>& bits) {
  return static_cast<double>(std::count(bits.begin(), bits.end(), 1)) / static_cast<double>(bits.size());
}

// Global scale so that fixed polygons plus scaled seeds reach `coverage`.
double fit_scale(const std::vector<Seed>& seeds, const std::vector<char>& fixed_bits,
                 const geom::Box& extent, int res, double coverage, double guess) {
  auto measure = [&](double scale) {
    std::vector<char> bits = fixed_bits;
    for (const auto& s : seeds) rasterize(build(s, scale), extent, res, bits);
    return covered_fraction(bits);
  };
  double lo = 0.0;
  double hi = guess;
  for (int i = 0; i < 60 && measure(hi) < coverage; ++i) {
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; i < 30; ++i) {
    const double mid = 0.5 * (lo + hi);
    (measure(mid) < coverage ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

constexpr int kFitResolution = 384;

}  // namespace

void check_options(const SynthOptions& o) {
  if (!(o.coverage > 0.0 && o.coverage < 1.0)) {
    throw Error(ErrorCode::DomainError, "coverage fraction must lie in (0, 1)");
  }
  const double w = o.extent.max_corner().x - o.extent.min_corner().x;
  const double h = o.extent.max_corner().y - o.extent.min_corner().y;
  if (!(w > 0.0 && h > 0.0)) throw Error(ErrorCode::DomainError, "extent must have positive area");
  if (!(o.size_spread >= 1.0)) throw Error(ErrorCode::DomainError, "size spread must be >= 1");
  if (o.noisy_vertices < 3) throw Error(ErrorCode::DomainError, "noisy polygons need >= 3 vertices");
  if (!(o.max_aspect >= 1.0)) throw Error(ErrorCode::DomainError, "max aspect must be >= 1");
  if (!(o.noise_depth >= 0.0 && o.noise_depth < 1.0)) {
    throw Error(ErrorCode::DomainError, "noise depth must lie in [0, 1)");
  }
  if (!(o.patch_size > 0.0 && o.tile_size > 0.0 && o.source_size > 0.0)) {
    throw Error(ErrorCode::DomainError, "sizes must be positive");
  }
  if (!(o.dense_share >= 0.0 && o.dense_share <= 1.0)) {
    throw Error(ErrorCode::DomainError, "dense share must lie in [0, 1]");
  }
}

std::vector<Target> generate_targets(const SynthOptions& o) {
  check_options(o);
  std::mt19937_64 rng(o.seed);
  const auto& lo = o.extent.min_corner();
  const auto& hi = o.extent.max_corner();
  const double area = (hi.x - lo.x) * (hi.y - lo.y);

  std::vector<Target> out;
  std::vector<char> fixed(static_cast<std::size_t>(kFitResolution) * kFitResolution, 0);
  std::vector<geom::Box> sparse_patches;

  if (o.layout == TargetLayout::Patchy) {
    std::vector<geom::Box> patches;
    for (double y = lo.y; y < hi.y; y += o.patch_size) {
      for (double x = lo.x; x < hi.x; x += o.patch_size) {
        patches.push_back({{x, y}, {std::min(x + o.patch_size, hi.x), std::min(y + o.patch_size, hi.y)}});
      }
    }
    for (std::size_t i = patches.size(); i > 1; --i) {
      std::swap(patches[i - 1], patches[static_cast<std::size_t>(uniform(rng) * static_cast<double>(i))]);
    }
    const double patch_area = o.patch_size * o.patch_size;
    const auto dense = std::min(patches.size(), static_cast<std::size_t>(
                                                    std::lround(o.dense_share * o.coverage * area / patch_area)));
    const double inset = 0.01 * o.tile_size;
    for (std::size_t p = 0; p < patches.size(); ++p) {
      if (p >= dense) {
        sparse_patches.push_back(patches[p]);
        continue;
      }
      const auto& b = patches[p];
      for (double y = b.min_corner().y; y < b.max_corner().y; y += o.tile_size) {
        for (double x = b.min_corner().x; x < b.max_corner().x; x += o.tile_size) {
          const geom::Box tile{{x + inset, y + inset},
                               {std::min(x + o.tile_size, b.max_corner().x) - inset,
                                std::min(y + o.tile_size, b.max_corner().y) - inset}};
          geom::Polygon poly = geom::to_polygon(tile);
          rasterize(poly, o.extent, kFitResolution, fixed);
          out.push_back(make_target(out.size(), std::move(poly)));
        }
      }
    }
  } else {
    sparse_patches.push_back(o.extent);
  }

  const std::size_t n_sparse = o.layout == TargetLayout::Patchy
                                   ? (o.n_targets > out.size() ? o.n_targets - out.size() : 0)
                                   : o.n_targets;
  if (n_sparse == 0 || sparse_patches.empty() || covered_fraction(fixed) >= o.coverage) return out;

  std::vector<Seed> seeds;
  seeds.reserve(n_sparse);
  const double log_spread = std::log(o.size_spread);
  for (std::size_t i = 0; i < n_sparse; ++i) {
    const auto& patch = sparse_patches[static_cast<std::size_t>(uniform(rng) * static_cast<double>(sparse_patches.size()))];
    const geom::Point c{uniform(rng, patch.min_corner().x, patch.max_corner().x),
                        uniform(rng, patch.min_corner().y, patch.max_corner().y)};
    const double rel = std::exp(uniform(rng, 0.0, log_spread));
    seeds.push_back(draw_seed(rng, c, rel, o.shape, o));
  }
  const double guess = std::sqrt(o.coverage * area / static_cast<double>(n_sparse)) / (2.0 * o.size_spread);
  const double scale = fit_scale(seeds, fixed, o.extent, kFitResolution, o.coverage, guess);
  for (const auto& s : seeds) out.push_back(make_target(out.size(), build(s, scale)));
  return out;
}

SourceGenerator::SourceGenerator(const SynthOptions& options, std::size_t count)
    : options_(options), count_(count), rng_(options.seed ^ 0x9E3779B97F4A7C15ULL) {
  check_options(options_);
}

std::optional<std::pair<std::string, geom::Geometry>> SourceGenerator::next() {
  if (emitted_ >= count_) return std::nullopt;
  const auto& lo = options_.extent.min_corner();
  const auto& hi = options_.extent.max_corner();
  const geom::Point c{uniform(rng_, lo.x, hi.x), uniform(rng_, lo.y, hi.y)};
  std::string id = "a" + std::to_string(emitted_++);
  if (options_.sources == SourceKind::Points) return std::pair{std::move(id), geom::Geometry{c}};
  const TargetShape shape = uniform(rng_) < 0.5 ? TargetShape::Axis : TargetShape::Rotated;
  SynthOptions shape_opts = options_;
  shape_opts.max_aspect = 2.0;
  const Seed s = draw_seed(rng_, c, uniform(rng_, 0.5, 1.5), shape, shape_opts);
  return std::pair{std::move(id), geom::make_valid_checked(geom::Geometry{build(s, options_.source_size)})};
}

double raster_coverage(const std::vector<Target>& targets, const geom::Box& extent, int resolution) {
  std::vector<char> bits(static_cast<std::size_t>(resolution) * resolution, 0);
  for (const auto& t : targets) {
    if (const auto* p = std::get_if<geom::Polygon>(&t.geometry)) {
      rasterize(*p, extent, resolution, bits);
    } else if (const auto* mp = std::get_if<geom::MultiPolygon>(&t.geometry)) {
      for (const auto& part : *mp) rasterize(part, extent, resolution, bits);
    }
  }
  return covered_fraction(bits);
}

void write_csv(std::ostream& out, const std::string& id, const geom::Geometry& g) {
  if (id.find_first_of(",\"\n\r") == std::string::npos) {
    out << id;
  } else {
    out << '"';
    for (char c : id) {
      if (c == '"') out << '"';
      out << c;
    }
    out << '"';
  }
  out << ",\"" << to_wkt(g) << "\"\n";
}

void write_targets_csv(std::ostream& out, const std::vector<Target>& targets) {
  for (const auto& t : targets) write_csv(out, t.id, t.geometry);
}

void write_sources_csv(std::ostream& out, SourceGenerator& sources) {
  while (auto s = sources.next()) write_csv(out, s->first, s->second);
}

}  // namespace masklink
