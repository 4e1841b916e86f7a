#include <vector>

#include "kernels_common.hpp"

#ifdef PITL_HAVE_OPENMP
#include <omp.h>
#endif

namespace pitl::kernels {

namespace omp {

// Each output row is owned by exactly one thread and accumulated in the same
// order as the serial reference; the i-p-j loop order only changes memory
// access, not rounding.

void matmul(const Tensor2D& a, const Tensor2D& b, Tensor2D& out) {
  detail::check_nn(a, b);
  const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(a.rows());
  const std::size_t k = a.cols(), n = b.cols();
  if (out.rows() != a.rows() || out.cols() != n) out = Tensor2D(a.rows(), n);
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* po = out.data().data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    double* orow = po + i * n;
    for (std::size_t j = 0; j < n; ++j) orow[j] = 0.0;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = pa[i * k + p];
      const double* brow = pb + p * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += aip * brow[j];
    }
  }
}

void matmul_tn_acc(const Tensor2D& a, const Tensor2D& g, Tensor2D& out) {
  detail::check_tn(a, g, out);
  const std::size_t m = a.rows(), n = g.cols();
  const std::ptrdiff_t k = static_cast<std::ptrdiff_t>(a.cols());
  const double* pa = a.data().data();
  const double* pg = g.data().data();
  double* po = out.data().data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < k; ++p) {
    double* orow = po + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double aip = pa[i * k + p];
      const double* grow = pg + i * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += aip * grow[j];
    }
  }
}

void matmul_nt_acc(const Tensor2D& g, const Tensor2D& b, Tensor2D& out) {
  detail::check_nt(g, b, out);
  const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(g.rows());
  const std::size_t n = g.cols(), k = b.rows();
  // b^T laid out row-major so the innermost loop is contiguous.
  std::vector<double> bt(n * k);
  for (std::size_t p = 0; p < k; ++p)
    for (std::size_t j = 0; j < n; ++j) bt[j * k + p] = b(p, j);
  const double* pg = g.data().data();
  double* po = out.data().data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    double* orow = po + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const double gij = pg[i * n + j];
      const double* btrow = bt.data() + j * k;
      for (std::size_t p = 0; p < k; ++p) orow[p] += gij * btrow[p];
    }
  }
}

void apply(Unary op, const Tensor2D& x, Tensor2D& out) {
  if (!out.same_shape(x)) out = Tensor2D(x.rows(), x.cols());
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
  const double* px = x.data().data();
  double* po = out.data().data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) po[i] = detail::unary(op, px[i]);
}

}  // namespace omp

namespace {
// Below this many multiply-adds the fork/join overhead dominates. Above it the
// omp variant wins even on one thread because of its loop order.
constexpr std::size_t kParallelWork = 1u << 12;

bool use_parallel(std::size_t work) { return work >= kParallelWork; }
}  // namespace

void matmul(const Tensor2D& a, const Tensor2D& b, Tensor2D& out) {
  if (use_parallel(a.rows() * a.cols() * b.cols())) {
    omp::matmul(a, b, out);
  } else {
    serial::matmul(a, b, out);
  }
}

void matmul_tn_acc(const Tensor2D& a, const Tensor2D& g, Tensor2D& out) {
  if (use_parallel(a.rows() * a.cols() * g.cols())) {
    omp::matmul_tn_acc(a, g, out);
  } else {
    serial::matmul_tn_acc(a, g, out);
  }
}

void matmul_nt_acc(const Tensor2D& g, const Tensor2D& b, Tensor2D& out) {
  if (use_parallel(g.rows() * g.cols() * b.rows())) {
    omp::matmul_nt_acc(g, b, out);
  } else {
    serial::matmul_nt_acc(g, b, out);
  }
}

void apply(Unary op, const Tensor2D& x, Tensor2D& out) {
  if (use_parallel(x.size() * 16)) {
    omp::apply(op, x, out);
  } else {
    serial::apply(op, x, out);
  }
}

bool parallel_enabled() noexcept {
#ifdef PITL_HAVE_OPENMP
  return true;
#else
  return false;
#endif
}

int max_threads() noexcept {
#ifdef PITL_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace pitl::kernels
