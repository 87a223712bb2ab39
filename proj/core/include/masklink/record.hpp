#pragma once

#include <cstddef>
#include <string>
#include <variant>

#include "masklink/geometry.hpp"

namespace masklink {

struct EntityRecord {
  std::string id;
  geom::Geometry geometry;
  std::size_t line = 0;  // 1-based input line, 0 when not read from a file
};

/// A source row that could not be turned into an entity, or an entity whose
/// processing failed.
struct RecordError {
  std::size_t line = 0;
  std::string id;
  std::string message;
};

using SourceItem = std::variant<EntityRecord, RecordError>;

}  // namespace masklink
