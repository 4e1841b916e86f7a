#include "pitl/data/dataset.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "pitl/errors.hpp"

namespace pitl {

std::size_t Dataset::column_index(std::string_view column) const {
  for (std::size_t i = 0; i < feature_names.size(); ++i)
    if (feature_names[i] == column) return i;
  throw ConfigError("dataset '" + name + "' has no column '" + std::string(column) + "'");
}

const std::vector<double>& Dataset::column(std::string_view column) const {
  if (column == target_name) return target;
  return features[column_index(column)];
}

Dataset Dataset::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > rows()) {
    throw DimensionError("slice [" + std::to_string(begin) + ", " + std::to_string(end) + ") of " +
                         std::to_string(rows()) + " rows");
  }
  Dataset out;
  out.name = name;
  out.feature_names = feature_names;
  out.target_name = target_name;
  out.provenance = provenance;
  auto cut = [&](const std::vector<double>& v) {
    return std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(begin),
                               v.begin() + static_cast<std::ptrdiff_t>(end));
  };
  out.time = cut(time);
  out.target = cut(target);
  for (const auto& col : features) out.features.push_back(cut(col));
  return out;
}

void Dataset::validate() const {
  if (features.size() != feature_names.size()) throw DimensionError("feature names and columns disagree");
  if (target.size() != rows()) throw DimensionError("target column length differs from time column");
  for (std::size_t c = 0; c < features.size(); ++c) {
    if (features[c].size() != rows()) {
      throw DimensionError("column '" + feature_names[c] + "' length differs from time column");
    }
  }
  for (std::size_t r = 1; r < rows(); ++r) {
    if (!(time[r] > time[r - 1])) {
      throw ParseError("time not strictly increasing at row " + std::to_string(r + 1));
    }
  }
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

IngestResult parse_csv(std::istream& in, const std::string& name) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(name + ": missing header row");
  std::vector<std::string> header = split_line(line);
  for (auto& h : header) h = trim(h);
  if (header.size() < 2) throw ParseError(name + ": header needs a time column and a target column");

  IngestResult result;
  Dataset& ds = result.dataset;
  ds.name = name;
  ds.feature_names.assign(header.begin() + 1, header.end() - 1);
  ds.target_name = header.back();
  ds.features.resize(ds.feature_names.size());

  std::size_t line_no = 1;
  std::vector<double> row(header.size());
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size()) {
      throw ParseError(name + ": row " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                       " cells, header has " + std::to_string(header.size()));
    }
    bool missing = false;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string cell = trim(cells[c]);
      if (cell.empty()) {
        missing = true;
        continue;
      }
      const char* end = cell.data() + cell.size();
      const auto res = std::from_chars(cell.data(), end, row[c]);
      if (res.ec != std::errc() || res.ptr != end) {
        throw ParseError(name + ": row " + std::to_string(line_no) + ", column " + std::to_string(c + 1) + " ('" +
                         header[c] + "'): cannot parse '" + cell + "'");
      }
    }
    if (missing) {
      ++result.dropped_rows;
      continue;
    }
    ds.time.push_back(row.front());
    for (std::size_t c = 0; c < ds.features.size(); ++c) ds.features[c].push_back(row[c + 1]);
    ds.target.push_back(row.back());
  }
  ds.validate();
  return result;
}

IngestResult ingest_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset " + path.string());
  return parse_csv(in, path.stem().string());
}

void write_csv(const Dataset& ds, std::ostream& out) {
  out << "t_days";
  for (const auto& n : ds.feature_names) out << ',' << n;
  out << ',' << ds.target_name << '\n';
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    out << format_double(ds.time[r]);
    for (const auto& col : ds.features) out << ',' << format_double(col[r]);
    out << ',' << format_double(ds.target[r]) << '\n';
  }
}

void write_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write dataset " + path.string());
  write_csv(ds, out);
}

}  // namespace pitl
