#pragma once

// Line-at-a-time readers for (id, wkt) datasets. CSV follows RFC 4180
// quoting, so WKT with commas must be quoted or be the last field; TSV
// splits at the first tab.

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "masklink/grid.hpp"
#include "masklink/record.hpp"

namespace masklink {

enum class DatasetFormat { Csv, Tsv };

struct DatasetOptions {
  DatasetFormat format = DatasetFormat::Csv;
  bool skip_header = false;
};

/// `.tsv` selects Tsv, anything else Csv.
DatasetFormat format_for_path(const std::string& path);

class DatasetReader {
 public:
  /// Reads from `in`, which must outlive the reader.
  DatasetReader(std::istream& in, DatasetOptions options);
  /// Opens `path`; "-" reads standard input. Throws Error(IoError).
  static DatasetReader open(const std::string& path, DatasetOptions options);

  DatasetReader(DatasetReader&&) noexcept;
  DatasetReader& operator=(DatasetReader&&) noexcept;
  ~DatasetReader();

  /// Next record or error record; nullopt at end of input. Throws
  /// Error(IoError) if the stream fails.
  std::optional<SourceItem> next();

  std::size_t line() const noexcept { return line_; }

 private:
  bool read_physical(std::string& out);
  bool read_logical(std::string& out, std::size_t& first_line, bool& unterminated);

  std::unique_ptr<std::istream> owned_;
  std::istream* in_;
  DatasetOptions options_;
  std::size_t line_ = 0;
  bool header_done_ = false;
};

/// Splits one CSV/TSV record into (id, wkt). Returns an error message on
/// malformed quoting or a missing field.
struct SplitRecord {
  std::string id;
  std::string wkt;
  std::string error;
};
SplitRecord split_record(const std::string& text, DatasetFormat format);

/// Loads a whole target dataset; bad rows are appended to `errors`.
std::vector<Target> load_targets(DatasetReader& reader, std::vector<RecordError>& errors);

}  // namespace masklink
