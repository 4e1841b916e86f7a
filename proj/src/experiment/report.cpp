#include "pitl/experiment/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "pitl/errors.hpp"
#include "pitl/experiment/manifest.hpp"

namespace pitl::experiment {

namespace {

std::string shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.5f", v);
  return buf;
}

void sort_rows(std::vector<MetricsRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const MetricsRow& a, const MetricsRow& b) {
    if (a.order != b.order) return a.order < b.order;
    if (a.name != b.name) return a.name < b.name;
    return a.seed < b.seed;
  });
}

}  // namespace

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw DimensionError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<SummaryRow> summarize(const MetricsReport& report) {
  std::vector<std::string> names;
  std::map<std::string, std::vector<const MetricsRow*>> by_name;
  std::vector<MetricsRow> rows = report.rows;
  sort_rows(rows);
  for (const MetricsRow& r : rows) {
    if (!by_name.count(r.name)) names.push_back(r.name);
    by_name[r.name];
  }
  std::vector<SummaryRow> out;
  for (const std::string& name : names) {
    SummaryRow s;
    s.name = name;
    std::array<std::vector<double>, 6> cols;
    for (const MetricsRow& r : rows) {
      if (r.name != name) continue;
      if (r.diverged) {
        ++s.diverged;
        continue;
      }
      ++s.runs;
      for (std::size_t k = 0; k < 6; ++k) cols[k].push_back(r.values[k]);
    }
    if (s.runs == 0) continue;
    for (std::size_t k = 0; k < 6; ++k) {
      s.median[k] = quantile(cols[k], 0.5);
      s.iqr[k] = quantile(cols[k], 0.75) - quantile(cols[k], 0.25);
    }
    out.push_back(s);
  }
  return out;
}

MetricsReport collect_report(const std::vector<std::filesystem::path>& run_dirs) {
  if (run_dirs.empty()) throw ConfigError("report: no run directories given");
  MetricsReport report;
  std::set<std::string> hashes;
  for (const auto& dir : run_dirs) {
    std::vector<std::filesystem::path> found;
    if (std::filesystem::is_regular_file(dir)) {
      found.push_back(dir);
    } else if (std::filesystem::is_directory(dir)) {
      for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().filename() == "manifest.json") found.push_back(e.path());
      }
    }
    if (found.empty()) throw ParseError("no manifest.json under " + dir.string());
    std::sort(found.begin(), found.end());
    for (const auto& path : found) {
      const Manifest m = read_manifest(path);
      MetricsRow row;
      row.name = m.model;
      row.order = m.order;
      row.seed = m.seed;
      row.diverged = m.status != "ok";
      row.diagnostic = m.diagnostic;
      if (!row.diverged) {
        for (std::size_t k = 0; k < 6; ++k) {
          if (!m.metrics.contains(kMetricKeys[k])) {
            throw ParseError(path.string() + ": metrics lack " + kMetricKeys[k]);
          }
          row.values[k] = m.metrics.at(kMetricKeys[k]).get<double>();
          if (!std::isfinite(row.values[k]) || row.values[k] < 0.0) {
            throw ParseError(path.string() + ": invalid " + kMetricKeys[k]);
          }
        }
      }
      hashes.insert(m.config_hash);
      report.rows.push_back(std::move(row));
    }
  }
  sort_rows(report.rows);
  report.config_hashes.assign(hashes.begin(), hashes.end());
  return report;
}

std::string runs_csv(const MetricsReport& report) {
  std::ostringstream out;
  out << "model,seed,status";
  for (const char* k : kMetricKeys) out << ',' << k;
  out << '\n';
  for (const MetricsRow& r : report.rows) {
    out << r.name << ',' << r.seed << ',' << (r.diverged ? "DIVERGED" : "ok");
    for (double v : r.values) {
      out << ',';
      if (!r.diverged) out << shortest(v);
    }
    out << '\n';
  }
  return out.str();
}

std::string summary_csv(const MetricsReport& report) {
  std::ostringstream out;
  out << "model,statistic,runs,diverged";
  for (const char* k : kMetricKeys) out << ',' << k;
  out << '\n';
  for (const SummaryRow& s : summarize(report)) {
    for (const auto& [stat, vals] : {std::pair{"median", &s.median}, std::pair{"iqr", &s.iqr}}) {
      out << s.name << ',' << stat << ',' << s.runs << ',' << s.diverged;
      for (double v : *vals) out << ',' << shortest(v);
      out << '\n';
    }
  }
  return out.str();
}

std::string report_table(const MetricsReport& report) {
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> header{"Model"};
  header.insert(header.end(), kMetricHeaders.begin(), kMetricHeaders.end());
  cells.push_back(header);

  std::map<std::string, std::size_t> seeds_per_model;
  for (const MetricsRow& r : report.rows) ++seeds_per_model[r.name];
  std::set<std::string> done;
  const std::vector<SummaryRow> summary = summarize(report);
  for (const MetricsRow& r : report.rows) {
    if (seeds_per_model[r.name] == 1) {
      std::vector<std::string> line{r.name};
      for (double v : r.values) line.push_back(r.diverged ? "DIVERGED" : fixed(v));
      cells.push_back(line);
      continue;
    }
    if (!done.insert(r.name).second) continue;
    const auto it = std::find_if(summary.begin(), summary.end(), [&](const SummaryRow& s) { return s.name == r.name; });
    if (it == summary.end()) {
      std::vector<std::string> line{r.name + " (all runs diverged)"};
      line.resize(7, "DIVERGED");
      cells.push_back(line);
      continue;
    }
    std::string suffix = " (n=" + std::to_string(it->runs);
    if (it->diverged > 0) suffix += ", " + std::to_string(it->diverged) + " diverged";
    suffix += ")";
    std::vector<std::string> med{r.name + " median" + suffix}, iqr{r.name + " IQR"};
    for (std::size_t k = 0; k < 6; ++k) {
      med.push_back(fixed(it->median[k]));
      iqr.push_back(fixed(it->iqr[k]));
    }
    cells.push_back(med);
    cells.push_back(iqr);
  }

  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& line : cells)
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
  std::ostringstream out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (std::size_t c = 0; c < cells[i].size(); ++c) {
      const std::string& s = cells[i][c];
      if (c == 0) {
        out << s << std::string(width[c] - s.size(), ' ');
      } else {
        out << "  " << std::string(width[c] - s.size(), ' ') << s;
      }
    }
    out << '\n';
    if (i == 0) {
      std::size_t total = 0;
      for (std::size_t w : width) total += w + 2;
      out << std::string(total - 2, '-') << '\n';
    }
  }
  return out.str();
}

}  // namespace pitl::experiment
