#include "masklink/link_writer.hpp"

#include <charconv>
#include <ostream>

#include "masklink/error.hpp"

namespace masklink {

std::string percent_encode(std::string_view id) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  out.reserve(id.size());
  for (unsigned char c : id) {
    const bool unreserved = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                            (c >= '0' && c <= '9') || c == '-' || c == '.' || c == '_' || c == '~';
    if (unreserved) {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xF]);
    }
  }
  return out;
}

std::string format_link(const Link& link, LinkFormat format) {
  const char* rel = to_string(link.relation.kind);
  if (format == LinkFormat::NTriples) {
    return "<http://example.org/source/" + percent_encode(link.source_id) +
           "> <http://example.org/rel/" + rel + "> <http://example.org/target/" +
           percent_encode(link.target_id) + "> .";
  }
  std::string out = link.source_id;
  out.push_back('\t');
  out += rel;
  out.push_back('\t');
  out += link.target_id;
  if (link.relation.kind == RelationKind::Nearby) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, link.relation.theta);
    out.push_back('\t');
    out.append(buf, ptr);
  }
  return out;
}

void LinkWriter::check() {
  if (!*out_) throw Error(ErrorCode::IoError, "failed writing links");
}

void LinkWriter::write(const Link& link) {
  *out_ << format_link(link, format_) << '\n';
  ++written_;
  out_->flush();
  check();
}

void LinkWriter::write(std::span<const Link> links) {
  for (const auto& l : links) *out_ << format_link(l, format_) << '\n';
  written_ += links.size();
  out_->flush();
  check();
}

}  // namespace masklink
