#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <json.hpp>

#include "pitl/cells/model.hpp"
#include "pitl/data/pipeline.hpp"
#include "pitl/training/physics.hpp"
#include "pitl/training/trainer.hpp"

namespace pitl {

/// How a pretrained source model is reused on a target task.
struct TransferPlan {
  /// Leading hidden layers of the source copied and frozen.
  std::size_t k_transfer = 3;
  /// Output width of the identity adapter. Unset: the input width of the first
  /// transferred layer (the source's feature count).
  std::optional<std::size_t> adapter_width;
  std::vector<LayerSpec> new_layers;
  double fine_tune_lr = 1e-5;
  std::optional<PhysicsLossConfig> physics;

  void validate(const Model& source) const;
  static std::vector<LayerSpec> uniform_layers(CellKind kind, std::size_t count, std::size_t width);
};

/// Adapter -> transferred layers -> new layers -> head, as one Model.
struct CustomModel {
  Model model;
  std::size_t adapter_layer = 0;
  std::vector<std::size_t> transferred_layers;
  std::vector<std::size_t> new_layers;
};

nlohmann::json custom_to_json(const CustomModel& m);
CustomModel custom_from_json(const nlohmann::json& doc);

struct PretrainResult {
  Model model;
  TrainHistory history;
  Metrics train;
  std::optional<Metrics> test;
};

/// Step 1: trains a freshly initialized source model.
PretrainResult pretrain_source(const ModelSpec& spec, const WindowBatch& train, const WindowBatch* test,
                               const TrainConfig& cfg, std::uint64_t seed);

/// Step 2: copies the first k hidden layers of `source` (frozen) behind a
/// trainable identity adapter, then appends the plan's new layers and a fresh
/// identity head. Throws CompositionError naming the junction whose widths differ.
CustomModel compose_custom(const Model& source, const TransferPlan& plan, std::size_t target_features,
                           std::uint64_t seed);

/// Step 3: trains the non-frozen parameters.
TrainHistory train_custom(CustomModel& model, const WindowBatch& windows, const TrainConfig& cfg,
                          const PhysicsData* physics = nullptr, const WindowBatch* validation = nullptr);

/// Step 4: unfreezes every layer and retrains at `learning_rate` with a fresh optimizer.
TrainHistory fine_tune(CustomModel& model, const WindowBatch& windows, TrainConfig cfg, double learning_rate,
                       const PhysicsData* physics = nullptr, const WindowBatch* validation = nullptr);

struct TransferResult {
  CustomModel model;
  TrainHistory custom_history;
  TrainHistory fine_tune_history;
};

/// Steps 2-4 in sequence. `physics`, when given, is used in both training steps.
TransferResult run_transfer(const Model& source, const TransferPlan& plan, const WindowBatch& windows,
                            const TrainConfig& custom_cfg, const TrainConfig& fine_tune_cfg, std::uint64_t seed,
                            const PhysicsData* physics = nullptr, const WindowBatch* validation = nullptr);

/// run_transfer with the plan's physics objective, whose inputs are read from
/// `raw_rows`, the un-normalized rows the windows were cut from. Throws
/// ConfigError when the plan has no physics config or a mapped column is missing.
TransferResult run_pitl(const Model& source, const TransferPlan& plan, const Dataset& raw_rows,
                        const WindowBatch& windows, const TrainConfig& custom_cfg, const TrainConfig& fine_tune_cfg,
                        std::uint64_t seed, const WindowBatch* validation = nullptr);

}  // namespace pitl
