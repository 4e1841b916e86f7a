#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pitl/asm1/asm1.hpp"
#include "pitl/cells/layer_spec.hpp"
#include "pitl/training/trainer.hpp"

namespace pitl::experiment {

/// Splitting and windowing shared by every run.
struct Protocol {
  std::size_t window = 5;
  double train_ratio = 0.9;
  std::size_t validation_len = 200;
  /// Target models see only the last this-many windows of the train split (0: all).
  std::size_t target_train_windows = 70;
  double source_train_ratio = 0.9;
  double industrial_train_ratio = 0.8;
};

struct SourcePlantConfig {
  std::size_t points = 673;
  asm1::Params params = asm1::bsm1_defaults();
};

struct SisterPlantConfig {
  std::size_t points = 600;
  double noise_frac = 0.1;
  std::vector<std::string> keep_columns{"Q", "pH", "COD", "NH4"};
  asm1::Params params;
  SisterPlantConfig();
};

struct TargetPlantConfig {
  std::size_t points = 900;
  /// Std of the Gaussian measurement noise on S_O, g O2/m3.
  double label_noise = 0.15;
  asm1::Params params;
  TargetPlantConfig();
};

struct Plants {
  SourcePlantConfig source;
  SisterPlantConfig sister;
  TargetPlantConfig target;
};

/// CSV files replacing the generated datasets.
struct DatasetPaths {
  std::optional<std::filesystem::path> source;
  std::optional<std::filesystem::path> industrial;
  std::optional<std::filesystem::path> target;
};

struct StackSpec {
  CellKind kind = CellKind::lstm;
  std::size_t layers = 5;
  std::size_t width = 30;
};

struct SourceConfig {
  StackSpec model;
  TrainConfig train;
  /// Pretrained model file; when unset the source is pretrained inline.
  std::optional<std::filesystem::path> path;
};

struct PhysicsConfig {
  double alpha = 1e-4;
  bool include_aeration = true;
  asm1::InputMap feature_map;
  /// Rate parameters; defaults to the target plant's.
  std::optional<asm1::Params> params;
};

enum class Role { baseline, transfer };
enum class SourceKind { open, industrial };

/// One row of the comparison: a baseline trained on the target alone, or a
/// transfer from one of the two source models.
struct ModelEntry {
  std::string name;
  std::string preset;
  Role role = Role::baseline;
  StackSpec stack;
  SourceKind source = SourceKind::open;
  std::size_t k_transfer = 3;
  std::optional<std::size_t> adapter_width;
  StackSpec new_layers;
  double fine_tune_lr = 1e-5;
  bool physics = false;
  std::optional<double> alpha;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::filesystem::path output_dir = "pitl_out";
  Protocol protocol;
  Plants plants;
  DatasetPaths datasets;
  SourceConfig open_source;
  SourceConfig industrial_source;
  TrainConfig target_train;
  TrainConfig custom_train;
  TrainConfig fine_tune;
  PhysicsConfig physics;
  std::vector<ModelEntry> models;

  ExperimentConfig();
  void validate() const;
};

const std::vector<std::string>& preset_names();
/// Throws ConfigError for an unknown preset.
ModelEntry preset(const std::string& name);
/// standard, more_complex, less_complex, open_source_tl, industrial_tl, pitl.
std::vector<ModelEntry> benchmark_models();

nlohmann::json to_json(const TrainConfig& c);
nlohmann::json to_json(const ExperimentConfig& c);
/// Every object is checked for unknown keys; absent keys keep their defaults.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Hex SHA-256 of the compact dump of to_json(c).
std::string config_hash(const ExperimentConfig& c);

}  // namespace pitl::experiment
