#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pitl/cells/model.hpp"
#include "pitl/data/pipeline.hpp"
#include "pitl/experiment/config.hpp"
#include "pitl/experiment/report.hpp"
#include "pitl/training/trainer.hpp"

namespace pitl::experiment {

/// Target series cut per protocol: stats from the whole train split, training
/// windows limited to the last `target_train_windows` of it.
struct PreparedTarget {
  Dataset raw;
  SplitSet raw_split;
  NormStats stats;
  WindowBatch train;
  WindowBatch test;
  WindowBatch validation;
};

PreparedTarget prepare_target(const Dataset& raw, const Protocol& protocol);

/// Source series: train/test only.
struct PreparedSource {
  Dataset raw;
  NormStats stats;
  WindowBatch train;
  WindowBatch test;
};

PreparedSource prepare_source(const Dataset& raw, double train_ratio, std::size_t window);

struct SeedData {
  Dataset source;
  Dataset industrial;
  Dataset target;
};

/// Configured CSVs where given, generated plants otherwise.
SeedData load_datasets(const ExperimentConfig& cfg, std::uint64_t seed);

/// Physics objective settings for the target series.
PhysicsLossConfig physics_config(const ExperimentConfig& cfg, const PreparedTarget& target, double alpha);

struct RunResult {
  MetricsRow row;
  /// Denormalized predictions on the train, test and validation windows (empty when diverged).
  std::vector<double> train_pred, test_pred, val_pred;
  /// p_r of the final model on the training windows.
  std::optional<double> train_physics_residual;
};

/// Runs models of one seed, pretraining each source model at most once.
/// Artifacts go to out/runs/seed_<seed>/<model>/ and out/sources/seed_<seed>/.
class SeedRunner {
 public:
  SeedRunner(const ExperimentConfig& cfg, std::uint64_t seed, std::filesystem::path out, std::string command);
  ~SeedRunner();

  const PreparedTarget& target() const;
  RunResult run(const ModelEntry& entry, std::size_t order);
  /// Writes out/predictions/seed_<seed>.csv for the given runs.
  void write_predictions(const std::vector<ModelEntry>& entries, const std::vector<RunResult>& results) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Progress lines; the default sink writes to stderr.
using LogSink = std::function<void(const std::string&)>;
void set_log_sink(LogSink sink);

/// Parallel cells allowed by PITL_THREADS (default 1).
std::size_t thread_cap();

/// Writes source_open.csv, industrial.csv and target.csv for cfg.seed.
void cmd_simulate(const ExperimentConfig& cfg);
/// Baseline models of cfg.models on cfg.seed.
MetricsReport cmd_train(const ExperimentConfig& cfg);
/// Transfer models of cfg.models on cfg.seed.
MetricsReport cmd_transfer(const ExperimentConfig& cfg);
/// Aggregates manifests; writes report.csv, runs.csv and report.txt into `out` when given.
MetricsReport cmd_report(const std::vector<std::filesystem::path>& run_dirs,
                         const std::optional<std::filesystem::path>& out);
/// Every model on every seed, then the report files in cfg.output_dir.
MetricsReport cmd_benchmark(const ExperimentConfig& cfg);

}  // namespace pitl::experiment
