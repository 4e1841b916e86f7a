#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pitl/numgrad/param.hpp"

namespace pitl {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

/// First and second moment estimates, one pair per parameter, plus the step count.
struct AdamState {
  std::vector<Tensor2D> m;
  std::vector<Tensor2D> v;
  std::size_t t = 0;
};

/// One bias-corrected Adam update of every non-frozen parameter. Frozen
/// parameters and their moments are left untouched. Throws StateError when a
/// trainable parameter has no gradient from a reverse sweep, or when `state`
/// was sized for a different parameter list.
void adam_step(std::span<Param* const> params, AdamState& state, const AdamConfig& cfg);

}  // namespace pitl
