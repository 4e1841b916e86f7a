#pragma once

#include <cstddef>

#include "pitl/numgrad/tensor.hpp"

// Dense matrix kernels used by the tape.
//
// Two implementations with identical signatures live side by side: `serial`
// is the plain reference kept for testing, `omp` is the OpenMP variant
// (row-parallel, cache-friendly loop order). Both accumulate every output
// element over the reduction index in ascending order, so their results are
// bit-identical; the unqualified entry points dispatch on problem size.
namespace pitl::kernels {

enum class Unary { sigmoid, tanh };

namespace serial {
/// out = a * b
void matmul(const Tensor2D& a, const Tensor2D& b, Tensor2D& out);
/// out += a^T * g
void matmul_tn_acc(const Tensor2D& a, const Tensor2D& g, Tensor2D& out);
/// out += g * b^T
void matmul_nt_acc(const Tensor2D& g, const Tensor2D& b, Tensor2D& out);
void apply(Unary op, const Tensor2D& x, Tensor2D& out);
}  // namespace serial

namespace omp {
void matmul(const Tensor2D& a, const Tensor2D& b, Tensor2D& out);
void matmul_tn_acc(const Tensor2D& a, const Tensor2D& g, Tensor2D& out);
void matmul_nt_acc(const Tensor2D& g, const Tensor2D& b, Tensor2D& out);
void apply(Unary op, const Tensor2D& x, Tensor2D& out);
}  // namespace omp

void matmul(const Tensor2D& a, const Tensor2D& b, Tensor2D& out);
void matmul_tn_acc(const Tensor2D& a, const Tensor2D& g, Tensor2D& out);
void matmul_nt_acc(const Tensor2D& g, const Tensor2D& b, Tensor2D& out);
void apply(Unary op, const Tensor2D& x, Tensor2D& out);

/// True when the library was built with OpenMP support.
bool parallel_enabled() noexcept;
/// Worker threads the omp variants use (1 without OpenMP).
int max_threads() noexcept;

}  // namespace pitl::kernels
