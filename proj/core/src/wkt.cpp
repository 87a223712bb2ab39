#include "masklink/wkt.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

namespace masklink {

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  geom::Geometry parse() {
    const std::size_t at = skip();
    const std::string kw = keyword();
    if (kw.empty()) throw ParseError(at, "expected a geometry keyword");
    geom::Geometry g;
    if (kw == "POINT") {
      g = point_body();
    } else if (kw == "LINESTRING") {
      g = linestring_body();
    } else if (kw == "POLYGON") {
      g = polygon_body();
    } else if (kw == "MULTIPOLYGON") {
      g = multipolygon_body();
    } else {
      throw ParseError(at, "unsupported geometry type '" + kw + "'");
    }
    const std::size_t end = skip();
    if (end != s_.size()) throw ParseError(end, "unexpected trailing text");
    return g;
  }

 private:
  std::size_t skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    return pos_;
  }

  std::string keyword() {
    std::string out;
    while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) {
      out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(s_[pos_]))));
      ++pos_;
    }
    return out;
  }

  void expect(char c) {
    const std::size_t at = skip();
    if (at >= s_.size()) throw ParseError(at, std::string("expected '") + c + "', found end of input");
    if (s_[at] != c) throw ParseError(at, std::string("expected '") + c + "'");
    ++pos_;
  }

  bool accept(char c) {
    if (skip() < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void open_body() {
    const std::size_t at = skip();
    const std::size_t save = pos_;
    const std::string kw = keyword();
    if (kw == "EMPTY") throw ParseError(at, "empty geometries are not supported");
    if (kw == "Z" || kw == "M" || kw == "ZM") throw ParseError(at, "only 2D coordinates are supported");
    pos_ = save;
    expect('(');
  }

  double number() {
    const std::size_t at = skip();
    const char* first = s_.data() + at;
    const char* last = s_.data() + s_.size();
    if (first != last && *first == '+') ++first;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr == first) throw ParseError(at, "expected a number");
    if (!std::isfinite(v)) throw ParseError(at, "coordinate is not finite");
    pos_ = static_cast<std::size_t>(ptr - s_.data());
    return v;
  }

  geom::Point coordinate() {
    const double x = number();
    const double y = number();
    const std::size_t at = skip();
    if (at < s_.size() && (s_[at] == '-' || s_[at] == '+' || s_[at] == '.' ||
                           std::isdigit(static_cast<unsigned char>(s_[at])))) {
      throw ParseError(at, "only 2D coordinates are supported");
    }
    return {x, y};
  }

  template <typename Container>
  void coordinates(Container& out) {
    open_body();
    do {
      out.push_back(coordinate());
    } while (accept(','));
    expect(')');
  }

  geom::Point point_body() {
    open_body();
    const geom::Point p = coordinate();
    expect(')');
    return p;
  }

  geom::PolyLine linestring_body() {
    geom::PolyLine line;
    coordinates(line);
    return line;
  }

  geom::Polygon polygon_body() {
    geom::Polygon poly;
    open_body();
    coordinates(poly.outer());
    while (accept(',')) {
      poly.inners().emplace_back();
      coordinates(poly.inners().back());
    }
    expect(')');
    return poly;
  }

  geom::MultiPolygon multipolygon_body() {
    geom::MultiPolygon mp;
    open_body();
    do {
      mp.push_back(polygon_body());
    } while (accept(','));
    expect(')');
    return mp;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

void append_number(std::string& out, double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

template <typename Range>
void append_coords(std::string& out, const Range& pts) {
  out.push_back('(');
  bool first = true;
  for (const auto& p : pts) {
    if (!first) out += ", ";
    first = false;
    append_number(out, p.x);
    out.push_back(' ');
    append_number(out, p.y);
  }
  out.push_back(')');
}

void append_polygon(std::string& out, const geom::Polygon& poly) {
  out.push_back('(');
  append_coords(out, poly.outer());
  for (const auto& hole : poly.inners()) {
    out += ", ";
    append_coords(out, hole);
  }
  out.push_back(')');
}

}  // namespace

geom::Geometry parse_wkt(std::string_view text) {
  return geom::make_valid_checked(Parser(text).parse());
}

std::string to_wkt(const geom::Geometry& g) {
  std::string out;
  if (const auto* p = std::get_if<geom::Point>(&g)) {
    out = "POINT (";
    append_number(out, p->x);
    out.push_back(' ');
    append_number(out, p->y);
    out.push_back(')');
  } else if (const auto* l = std::get_if<geom::PolyLine>(&g)) {
    out = "LINESTRING ";
    append_coords(out, *l);
  } else if (const auto* poly = std::get_if<geom::Polygon>(&g)) {
    out = "POLYGON ";
    append_polygon(out, *poly);
  } else {
    out = "MULTIPOLYGON (";
    bool first = true;
    for (const auto& part : std::get<geom::MultiPolygon>(g)) {
      if (!first) out += ", ";
      first = false;
      append_polygon(out, part);
    }
    out.push_back(')');
  }
  return out;
}

}  // namespace masklink
