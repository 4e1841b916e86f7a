#include "pitl/data/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "pitl/errors.hpp"
#include "pitl/numgrad/init.hpp"

namespace pitl {

namespace {

ColumnRange fit_range(const std::vector<double>& v, const std::string& name) {
  if (v.empty()) throw ConfigError("cannot fit normalization on zero rows");
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  if (!(*hi > *lo)) throw ConfigError("column '" + name + "' is constant on the training rows");
  return {*lo, *hi};
}

void check_columns(const Dataset& ds, const NormStats& stats) {
  if (ds.feature_names != stats.feature_names) {
    throw ConfigError("normalization stats do not match the columns of dataset '" + ds.name + "'");
  }
}

}  // namespace

NormStats fit_stats(const Dataset& train) {
  NormStats stats;
  stats.feature_names = train.feature_names;
  for (std::size_t c = 0; c < train.features.size(); ++c) {
    stats.features.push_back(fit_range(train.features[c], train.feature_names[c]));
  }
  stats.target = fit_range(train.target, train.target_name);
  return stats;
}

Dataset normalize(const Dataset& ds, const NormStats& stats) {
  check_columns(ds, stats);
  Dataset out = ds;
  for (std::size_t c = 0; c < out.features.size(); ++c)
    for (double& v : out.features[c]) v = stats.features[c].normalize(v);
  for (double& v : out.target) v = stats.target.normalize(v);
  return out;
}

Dataset denormalize(const Dataset& ds, const NormStats& stats) {
  check_columns(ds, stats);
  Dataset out = ds;
  for (std::size_t c = 0; c < out.features.size(); ++c)
    for (double& v : out.features[c]) v = stats.features[c].denormalize(v);
  for (double& v : out.target) v = stats.target.denormalize(v);
  return out;
}

SplitSet split_sequential(const Dataset& ds, double train_ratio, std::size_t validation_len) {
  if (!(train_ratio > 0.0 && train_ratio <= 1.0)) throw ConfigError("train ratio must lie in (0, 1]");
  if (ds.rows() <= validation_len) {
    throw ConfigError("dataset '" + ds.name + "' has " + std::to_string(ds.rows()) +
                      " rows, not enough for a validation block of " + std::to_string(validation_len));
  }
  const std::size_t head = ds.rows() - validation_len;
  const auto n_train = static_cast<std::size_t>(std::floor(train_ratio * static_cast<double>(head)));
  if (n_train == 0) throw ConfigError("train split of dataset '" + ds.name + "' would be empty");
  SplitSet s;
  s.test_begin = n_train;
  s.validation_begin = head;
  s.train = ds.slice(0, n_train);
  s.test = ds.slice(n_train, head);
  s.validation = ds.slice(head, ds.rows());
  return s;
}

WindowBatch WindowBatch::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > size()) throw DimensionError("window slice out of range");
  WindowBatch out;
  out.window = window;
  const std::size_t f = steps.empty() ? 0 : steps.front().cols();
  for (const Tensor2D& s : steps) {
    std::vector<double> v(s.data().begin() + static_cast<std::ptrdiff_t>(begin * f),
                          s.data().begin() + static_cast<std::ptrdiff_t>(end * f));
    out.steps.emplace_back(end - begin, f, std::move(v));
  }
  out.targets = Tensor2D(end - begin, 1,
                         std::vector<double>(targets.data().begin() + static_cast<std::ptrdiff_t>(begin),
                                             targets.data().begin() + static_cast<std::ptrdiff_t>(end)));
  out.target_rows.assign(target_rows.begin() + static_cast<std::ptrdiff_t>(begin),
                         target_rows.begin() + static_cast<std::ptrdiff_t>(end));
  out.target_time.assign(target_time.begin() + static_cast<std::ptrdiff_t>(begin),
                         target_time.begin() + static_cast<std::ptrdiff_t>(end));
  return out;
}

WindowBatch WindowBatch::tail(std::size_t n) const {
  const std::size_t k = std::min(n, size());
  return slice(size() - k, size());
}

WindowBatch make_windows(const Dataset& rows, std::size_t window) {
  if (window == 0) throw ConfigError("window length must be >= 1");
  if (rows.rows() < window) {
    throw ConfigError("dataset '" + rows.name + "' has " + std::to_string(rows.rows()) +
                      " rows, fewer than the window length " + std::to_string(window));
  }
  const std::size_t n = window_count(rows.rows(), window);
  const std::size_t f = rows.feature_count();
  WindowBatch wb;
  wb.window = window;
  wb.steps.assign(window, Tensor2D(n, f));
  wb.targets = Tensor2D(n, 1);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t t = 0; t < window; ++t)
      for (std::size_t c = 0; c < f; ++c) wb.steps[t](k, c) = rows.features[c][k + t];
    const std::size_t last = k + window - 1;
    wb.targets(k, 0) = rows.target[last];
    wb.target_rows.push_back(last);
    wb.target_time.push_back(rows.time[last]);
  }
  return wb;
}

Dataset derive_industrial(const Dataset& ds, std::uint64_t seed, double noise_std_frac,
                          const std::vector<std::string>& keep_columns, std::size_t n_points) {
  if (n_points > ds.rows()) {
    throw ConfigError("cannot take " + std::to_string(n_points) + " rows from a dataset of " +
                      std::to_string(ds.rows()));
  }
  if (noise_std_frac < 0.0) throw ConfigError("noise fraction must be >= 0");
  Dataset out;
  out.name = ds.name + "_industrial";
  out.target_name = ds.target_name;
  out.provenance = ds.provenance + "; derived: " + std::to_string(n_points) + " rows, noise fraction " +
                   std::to_string(noise_std_frac) + ", seed " + std::to_string(seed);
  out.time.assign(ds.time.begin(), ds.time.begin() + static_cast<std::ptrdiff_t>(n_points));
  auto head = [&](const std::vector<double>& v) {
    return std::vector<double>(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n_points));
  };
  for (const std::string& c : keep_columns) {
    out.feature_names.push_back(c);
    out.features.push_back(head(ds.features[ds.column_index(c)]));
  }
  out.target = head(ds.target);

  if (noise_std_frac > 0.0) {
    Rng rng(seed);
    std::normal_distribution<double> unit(0.0, 1.0);
    auto perturb = [&](std::vector<double>& v) {
      double mean = 0.0;
      for (double x : v) mean += x;
      mean /= static_cast<double>(v.size());
      double var = 0.0;
      for (double x : v) var += (x - mean) * (x - mean);
      const double sd = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0;
      for (double& x : v) x += noise_std_frac * sd * unit(rng);
    };
    for (auto& col : out.features) perturb(col);
    perturb(out.target);
  }
  return out;
}

}  // namespace pitl
