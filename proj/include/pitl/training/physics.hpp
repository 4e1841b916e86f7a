#pragma once

#include <optional>
#include <span>
#include <vector>

#include "pitl/asm1/asm1.hpp"
#include "pitl/data/dataset.hpp"
#include "pitl/data/pipeline.hpp"
#include "pitl/numgrad/tape.hpp"

namespace pitl {

/// Weighting and inputs of the backward-Euler oxygen residual.
struct PhysicsLossConfig {
  double alpha = 0.1;
  asm1::Params rate_params = asm1::bsm1_defaults();
  /// When false the rate function is the pure consumption balance (kla = 0).
  bool include_aeration = false;
  /// Dataset columns feeding S_S, S_NH, x_BH and x_BA.
  asm1::InputMap feature_map;
  double dt = 1.0;
  /// Target range used to bring normalized predictions back to g O2/m3.
  ColumnRange target_range;

  void validate() const;
  asm1::Params effective_params() const;
};

/// Rate-function inputs other than S_O, one entry per series point.
struct OdeInputs {
  std::vector<double> S_S, S_NH, x_BH, x_BA;
  std::size_t size() const noexcept { return S_S.size(); }
  OdeInputs slice(std::size_t begin, std::size_t end) const;
};

/// Reads the mapped columns of `raw` (physical units) at `rows`.
/// Throws ConfigError naming the first missing column.
OdeInputs gather_ode_inputs(const Dataset& raw, const asm1::InputMap& map, std::span<const std::size_t> rows);

/// p_r = (1/N) sum_{i=1}^{N-1} (y_i - y_{i-1} - dt f(x_i, y_hat_i))^2 with actual
/// y on the left, the prediction inside f, everything in physical units.
/// Predicted S_O below zero enters f as zero.
double physics_residual(std::span<const double> y, std::span<const double> y_hat, const OdeInputs& exog,
                        const PhysicsLossConfig& cfg);

/// Everything the residual needs for a window batch, aligned with its rows.
struct PhysicsTargets {
  std::vector<double> y;  ///< actual target, physical units
  OdeInputs exog;
  std::size_t size() const noexcept { return y.size(); }
  PhysicsTargets slice(std::size_t begin, std::size_t end) const;
};

/// `raw` is the un-normalized dataset `windows` was cut from.
PhysicsTargets make_physics_targets(const Dataset& raw, const WindowBatch& windows, const asm1::InputMap& map);

/// Differentiable p_r of a batch given normalized predictions (N x 1).
Var physics_term(Var y_hat_normalized, const PhysicsTargets& targets, const PhysicsLossConfig& cfg);

/// mse + alpha p_r (plain mse without a physics context or with alpha = 0).
double objective(std::span<const double> pred, std::span<const double> actual,
                 const std::optional<double>& physics_residual_value, double alpha);

}  // namespace pitl
