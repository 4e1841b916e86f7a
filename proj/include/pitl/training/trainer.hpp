#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "pitl/cells/model.hpp"
#include "pitl/data/pipeline.hpp"
#include "pitl/training/adam.hpp"
#include "pitl/training/physics.hpp"

namespace pitl {

struct TrainConfig {
  std::size_t epochs = 100;
  double learning_rate = 1e-3;
  /// 0 means one batch holding every window.
  std::size_t batch_size = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Windows are always visited in chronological order; true is rejected.
  bool shuffle = false;
  std::uint64_t seed = 0;
  /// Abort once the epoch objective exceeds this or stops being finite.
  double divergence_limit = 1e6;

  void validate() const;
  AdamConfig adam() const { return {learning_rate, beta1, beta2, epsilon}; }
};

/// Training windows with, optionally, the physics residual inputs aligned to them.
struct PhysicsData {
  PhysicsLossConfig config;
  PhysicsTargets targets;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_objective = 0.0;
  double train_mse = 0.0;
  double train_mae = 0.0;
  std::optional<double> val_mse;
  std::optional<double> val_mae;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;

  /// Columns epoch,train_objective,train_mse,train_mae,val_mse,val_mae; absent
  /// validation values are empty cells.
  void write_csv(const std::filesystem::path& path) const;
};

struct Metrics {
  double mse = 0.0;
  double mae = 0.0;
};

/// Batched forward pass over all windows; N x 1 predictions.
std::vector<double> predict(Model& model, const WindowBatch& windows);
Metrics evaluate(Model& model, const WindowBatch& windows);

/// Minimizes mse (+ alpha p_r when `physics` is given) with Adam over
/// chronologically ordered batches. Per-epoch training figures are the
/// batch-size-weighted means observed during the epoch; validation figures are
/// computed after the epoch's last update. A fresh Adam state is used.
/// Throws DivergenceError carrying the epoch index.
TrainHistory train(Model& model, const WindowBatch& windows, const TrainConfig& cfg,
                   const PhysicsData* physics = nullptr, const WindowBatch* validation = nullptr);

}  // namespace pitl
