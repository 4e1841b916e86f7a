#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace pitl {

/// Time-indexed table of feature columns and one target column.
/// Columns are stored one vector per column.
struct Dataset {
  std::string name;
  std::vector<double> time;
  std::vector<std::string> feature_names;
  std::vector<std::vector<double>> features;
  std::vector<double> target;
  std::string target_name = "S_O";
  std::string provenance;

  std::size_t rows() const noexcept { return time.size(); }
  std::size_t feature_count() const noexcept { return feature_names.size(); }

  /// Throws ConfigError for unknown names.
  std::size_t column_index(std::string_view column) const;
  const std::vector<double>& column(std::string_view column) const;
  /// Rows [begin, end).
  Dataset slice(std::size_t begin, std::size_t end) const;
  /// Column lengths agree and time is strictly increasing.
  void validate() const;
};

struct IngestResult {
  Dataset dataset;
  std::size_t dropped_rows = 0;
};

/// Header `t_days,<features...>,<target>`; rows with an empty cell are dropped
/// and counted, anything else unparseable is a ParseError naming row and column.
IngestResult ingest_csv(const std::filesystem::path& path);
IngestResult parse_csv(std::istream& in, const std::string& name);

/// Shortest round-trip decimal rendering, `.` separator.
void write_csv(const Dataset& ds, std::ostream& out);
void write_csv(const Dataset& ds, const std::filesystem::path& path);

}  // namespace pitl
