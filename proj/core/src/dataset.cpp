#include "masklink/dataset.hpp"

#include <fstream>
#include <iostream>

#include "masklink/wkt.hpp"

namespace masklink {

DatasetFormat format_for_path(const std::string& path) {
  const auto dot = path.rfind('.');
  if (dot != std::string::npos && path.substr(dot) == ".tsv") return DatasetFormat::Tsv;
  return DatasetFormat::Csv;
}

DatasetReader::DatasetReader(std::istream& in, DatasetOptions options)
    : in_(&in), options_(options) {}

DatasetReader DatasetReader::open(const std::string& path, DatasetOptions options) {
  if (path == "-") return DatasetReader(std::cin, options);
  auto file = std::make_unique<std::ifstream>(path, std::ios::binary);
  if (!*file) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  DatasetReader reader(*file, options);
  reader.owned_ = std::move(file);
  return reader;
}

DatasetReader::DatasetReader(DatasetReader&&) noexcept = default;
DatasetReader& DatasetReader::operator=(DatasetReader&&) noexcept = default;
DatasetReader::~DatasetReader() = default;

bool DatasetReader::read_physical(std::string& out) {
  if (!std::getline(*in_, out)) {
    if (in_->bad()) throw Error(ErrorCode::IoError, "read failed after line " + std::to_string(line_));
    return false;
  }
  ++line_;
  if (!out.empty() && out.back() == '\r') out.pop_back();
  return true;
}

// A CSV record may span lines inside a quoted field.
bool DatasetReader::read_logical(std::string& out, std::size_t& first_line, bool& unterminated) {
  unterminated = false;
  if (!read_physical(out)) return false;
  first_line = line_;
  if (options_.format != DatasetFormat::Csv) return true;
  auto open_quote = [](const std::string& s) {
    bool open = false;
    for (char c : s) {
      if (c == '"') open = !open;
    }
    return open;
  };
  std::string more;
  while (open_quote(out)) {
    if (!read_physical(more)) {
      unterminated = true;
      return true;
    }
    out.push_back('\n');
    out += more;
  }
  return true;
}

SplitRecord split_record(const std::string& text, DatasetFormat format) {
  SplitRecord r;
  if (format == DatasetFormat::Tsv) {
    const auto tab = text.find('\t');
    if (tab == std::string::npos) {
      r.error = "expected two tab-separated columns (id, wkt)";
      return r;
    }
    r.id = text.substr(0, tab);
    r.wkt = text.substr(tab + 1);
    if (const auto extra = r.wkt.find('\t'); extra != std::string::npos) r.wkt.resize(extra);
    return r;
  }

  std::size_t i = 0;
  auto field = [&](std::string& out, bool last) -> bool {
    if (i < text.size() && text[i] == '"') {
      ++i;
      for (;;) {
        if (i >= text.size()) {
          r.error = "unterminated quoted field";
          return false;
        }
        if (text[i] == '"') {
          if (i + 1 < text.size() && text[i + 1] == '"') {
            out.push_back('"');
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        out.push_back(text[i++]);
      }
      if (i < text.size() && text[i] != ',') {
        r.error = "unexpected character after closing quote at column " + std::to_string(i + 1);
        return false;
      }
      return true;
    }
    // An unquoted final field takes the rest of the line, commas included.
    const std::size_t end = last ? std::string::npos : text.find(',', i);
    out = text.substr(i, end == std::string::npos ? std::string::npos : end - i);
    i = end == std::string::npos ? text.size() : end;
    return true;
  };

  if (!field(r.id, false)) return r;
  if (i >= text.size()) {
    r.error = "expected two comma-separated columns (id, wkt)";
    return r;
  }
  ++i;  // comma
  field(r.wkt, true);
  return r;
}

std::optional<SourceItem> DatasetReader::next() {
  std::string text;
  std::size_t first_line = 0;
  bool unterminated = false;
  for (;;) {
    if (!read_logical(text, first_line, unterminated)) return std::nullopt;
    if (options_.skip_header && !header_done_) {
      header_done_ = true;
      continue;
    }
    header_done_ = true;
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    break;
  }
  if (unterminated) return RecordError{first_line, {}, "unterminated quoted field"};

  SplitRecord r = split_record(text, options_.format);
  if (!r.error.empty()) return RecordError{first_line, r.id, r.error};
  if (r.id.empty()) return RecordError{first_line, {}, "empty id"};
  geom::Geometry g;
  try {
    g = parse_wkt(r.wkt);
  } catch (const Error& e) {
    return RecordError{first_line, r.id, e.what()};
  }
  return EntityRecord{std::move(r.id), std::move(g), first_line};
}

std::vector<Target> load_targets(DatasetReader& reader, std::vector<RecordError>& errors) {
  std::vector<Target> out;
  while (auto item = reader.next()) {
    if (auto* err = std::get_if<RecordError>(&*item)) {
      errors.push_back(std::move(*err));
      continue;
    }
    auto& rec = std::get<EntityRecord>(*item);
    if (!geom::is_areal(rec.geometry)) {
      errors.push_back({rec.line, rec.id, std::string("targets must be areal, got ") +
                                              geom::type_name(rec.geometry)});
      continue;
    }
    Target t;
    t.envelope = geom::envelope(rec.geometry);
    t.id = std::move(rec.id);
    t.geometry = std::move(rec.geometry);
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace masklink
