#pragma once

#include <cstdint>
#include <random>

#include "pitl/numgrad/tensor.hpp"

namespace pitl {

/// Deterministic engine used for every seeded draw in the library.
using Rng = std::mt19937_64;

/// Uniform in [-limit, +limit] with limit = sqrt(6 / (fan_in + fan_out)).
Tensor2D glorot_uniform(std::size_t rows, std::size_t cols, std::size_t fan_in, std::size_t fan_out, Rng& rng);

}  // namespace pitl
