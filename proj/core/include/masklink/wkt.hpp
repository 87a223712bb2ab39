#pragma once

#include <string>
#include <string_view>

#include "masklink/geometry.hpp"

namespace masklink {

/// POINT, LINESTRING, POLYGON and MULTIPOLYGON in 2D. Keywords are case
/// insensitive. The result is normalized and validated.
/// Throws ParseError (with byte offset) or Error(ValidationError).
geom::Geometry parse_wkt(std::string_view text);

/// Shortest round-trip coordinates, e.g. "POLYGON ((0 0, 2 0, 2 2, 0 2, 0 0))".
std::string to_wkt(const geom::Geometry& g);

}  // namespace masklink
