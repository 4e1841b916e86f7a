#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pitl/data/dataset.hpp"
#include "pitl/numgrad/tensor.hpp"

namespace pitl {

struct ColumnRange {
  double min = 0.0;
  double max = 1.0;

  /// 2 (x - min) / (max - min) - 1
  double normalize(double x) const { return 2.0 * (x - min) / (max - min) - 1.0; }
  double denormalize(double z) const { return (z + 1.0) * 0.5 * (max - min) + min; }
};

/// Per-column ranges fitted on training rows only.
struct NormStats {
  std::vector<std::string> feature_names;
  std::vector<ColumnRange> features;
  ColumnRange target;
};

/// Throws ConfigError when a column is constant over the given rows.
NormStats fit_stats(const Dataset& train);
/// Maps features and target into [-1, 1] on the fitted ranges; values outside
/// the training range land outside [-1, 1].
Dataset normalize(const Dataset& ds, const NormStats& stats);
Dataset denormalize(const Dataset& ds, const NormStats& stats);

struct SplitSet {
  Dataset train;
  Dataset test;
  Dataset validation;
  std::size_t test_begin = 0;
  std::size_t validation_begin = 0;
};

/// Chronological partition: validation is the last `validation_len` rows; of the
/// rest the first floor(train_ratio * n) rows train and the remainder test.
SplitSet split_sequential(const Dataset& ds, double train_ratio, std::size_t validation_len);

/// Many-to-one windows: T consecutive feature rows predicting the target on the
/// last row. Stride 1, never crossing the end of `rows`.
struct WindowBatch {
  std::size_t window = 0;
  /// T tensors of shape N x F; steps[t] row k is day k + t of the split.
  std::vector<Tensor2D> steps;
  Tensor2D targets;  // N x 1
  /// Row index (within the windowed dataset) of each window's target day.
  std::vector<std::size_t> target_rows;
  std::vector<double> target_time;

  std::size_t size() const noexcept { return target_rows.size(); }
  WindowBatch slice(std::size_t begin, std::size_t end) const;
  /// Last n windows.
  WindowBatch tail(std::size_t n) const;
};

WindowBatch make_windows(const Dataset& rows, std::size_t window);

/// Number of stride-1 windows of length T in n rows.
constexpr std::size_t window_count(std::size_t rows, std::size_t window) {
  return rows >= window && window > 0 ? rows - window + 1 : 0;
}

/// First `n_points` rows restricted to `keep_columns`, with seeded Gaussian noise
/// of std = noise_std_frac * column std added to every kept feature and the target.
Dataset derive_industrial(const Dataset& ds, std::uint64_t seed, double noise_std_frac,
                          const std::vector<std::string>& keep_columns, std::size_t n_points);

}  // namespace pitl
