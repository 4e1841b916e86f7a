#pragma once

#include <string>

#include "pitl/numgrad/tensor.hpp"

namespace pitl {

/// A trainable tensor with its gradient accumulator.
///
/// `frozen` is honoured by optimizers; forward and reverse passes treat frozen
/// and trainable parameters identically unless the tape is told to skip them.
struct Param {
  std::string name;
  Tensor2D value;
  Tensor2D grad;
  bool frozen = false;
  /// Set by a reverse sweep that reached this parameter, cleared by zero_grad.
  bool grad_ready = false;

  Param() = default;
  Param(std::string n, Tensor2D v, bool is_frozen = false)
      : name(std::move(n)), value(std::move(v)), grad(value.rows(), value.cols()), frozen(is_frozen) {}

  void zero_grad() {
    if (!grad.same_shape(value)) grad = Tensor2D(value.rows(), value.cols());
    grad.fill(0.0);
    grad_ready = false;
  }
};

}  // namespace pitl
