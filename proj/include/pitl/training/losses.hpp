#pragma once

#include <span>

#include "pitl/numgrad/tape.hpp"

namespace pitl {

/// (1/N) sum (pred - actual)^2; throws DimensionError on empty or mismatched input.
double mse(std::span<const double> pred, std::span<const double> actual);
/// (1/N) sum |pred - actual|
double mae(std::span<const double> pred, std::span<const double> actual);

/// Differentiable MSE between two tensors of equal shape.
Var mse(Var pred, Var actual);

}  // namespace pitl
