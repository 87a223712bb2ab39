#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

#include "masklink/relation.hpp"

namespace masklink {

enum class LinkFormat { Tsv, NTriples };

/// Percent-encodes everything outside the RFC 3986 unreserved set.
std::string percent_encode(std::string_view id);

/// One serialized line without the trailing newline.
std::string format_link(const Link& link, LinkFormat format);

/// Writes links to a stream the caller owns, flushing after every batch.
class LinkWriter {
 public:
  LinkWriter(std::ostream& out, LinkFormat format) : out_(&out), format_(format) {}

  void write(const Link& link);
  void write(std::span<const Link> links);
  std::size_t written() const noexcept { return written_; }

 private:
  void check();

  std::ostream* out_;
  LinkFormat format_;
  std::size_t written_ = 0;
};

}  // namespace masklink
