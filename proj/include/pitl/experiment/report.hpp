#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace pitl::experiment {

/// Column order of every report: Train/Test/Validation MSE, then MAE.
inline constexpr std::array<const char*, 6> kMetricKeys{"train_mse", "test_mse", "val_mse",
                                                        "train_mae", "test_mae", "val_mae"};
inline constexpr std::array<const char*, 6> kMetricHeaders{"Train MSE", "Test MSE", "Validation MSE",
                                                           "Train MAE", "Test MAE", "Validation MAE"};

struct MetricsRow {
  std::string name;
  std::size_t order = 0;
  std::uint64_t seed = 0;
  std::array<double, 6> values{};
  bool diverged = false;
  std::string diagnostic;
};

struct MetricsReport {
  std::vector<MetricsRow> rows;
  /// Distinct config hashes of the collected runs, sorted.
  std::vector<std::string> config_hashes;
};

/// Sample quantile with linear interpolation between order statistics
/// (h = (n - 1) p). Throws DimensionError on an empty sample.
double quantile(std::vector<double> values, double p);

struct SummaryRow {
  std::string name;
  std::size_t runs = 0;
  std::size_t diverged = 0;
  std::array<double, 6> median{};
  std::array<double, 6> iqr{};
};

/// Median and interquartile range per model over its non-divergent runs, in
/// configured order. Models whose every run diverged are omitted.
std::vector<SummaryRow> summarize(const MetricsReport& report);

/// Reads manifest.json files found under each directory (recursively).
/// Throws ConfigError for an empty list and ParseError when a directory holds no manifest.
MetricsReport collect_report(const std::vector<std::filesystem::path>& run_dirs);

/// One line per run; divergent runs appear as marker rows without numbers.
std::string runs_csv(const MetricsReport& report);
/// Median and IQR line per model.
std::string summary_csv(const MetricsReport& report);
/// Aligned text table: plain rows for single-seed models, median and IQR rows otherwise.
std::string report_table(const MetricsReport& report);

}  // namespace pitl::experiment
