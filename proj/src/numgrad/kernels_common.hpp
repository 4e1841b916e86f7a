#pragma once

#include <cmath>

#include "pitl/errors.hpp"
#include "pitl/numgrad/kernels.hpp"

namespace pitl::kernels::detail {

inline double sigmoid(double x) {
  // Split on sign so exp never overflows.
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double unary(Unary op, double x) {
  return op == Unary::sigmoid ? sigmoid(x) : std::tanh(x);
}

inline void check_nn(const Tensor2D& a, const Tensor2D& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: cannot multiply " + a.shape_str() + " by " + b.shape_str());
  }
}

inline void check_tn(const Tensor2D& a, const Tensor2D& g, const Tensor2D& out) {
  if (a.rows() != g.rows() || out.rows() != a.cols() || out.cols() != g.cols()) {
    throw DimensionError("matmul_tn: " + a.shape_str() + "^T * " + g.shape_str() +
                         " into " + out.shape_str());
  }
}

inline void check_nt(const Tensor2D& g, const Tensor2D& b, const Tensor2D& out) {
  if (g.cols() != b.cols() || out.rows() != g.rows() || out.cols() != b.rows()) {
    throw DimensionError("matmul_nt: " + g.shape_str() + " * " + b.shape_str() +
                         "^T into " + out.shape_str());
  }
}

}  // namespace pitl::kernels::detail
