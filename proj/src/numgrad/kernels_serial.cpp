#include "kernels_common.hpp"

namespace pitl::kernels::serial {

void matmul(const Tensor2D& a, const Tensor2D& b, Tensor2D& out) {
  detail::check_nn(a, b);
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (out.rows() != m || out.cols() != n) out = Tensor2D(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += a(i, p) * b(p, j);
      out(i, j) = s;
    }
  }
}

void matmul_tn_acc(const Tensor2D& a, const Tensor2D& g, Tensor2D& out) {
  detail::check_tn(a, g, out);
  const std::size_t m = a.rows(), k = a.cols(), n = g.cols();
  for (std::size_t p = 0; p < k; ++p) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = out(p, j);
      for (std::size_t i = 0; i < m; ++i) s += a(i, p) * g(i, j);
      out(p, j) = s;
    }
  }
}

void matmul_nt_acc(const Tensor2D& g, const Tensor2D& b, Tensor2D& out) {
  detail::check_nt(g, b, out);
  const std::size_t m = g.rows(), n = g.cols(), k = b.rows();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      double s = out(i, p);
      for (std::size_t j = 0; j < n; ++j) s += g(i, j) * b(p, j);
      out(i, p) = s;
    }
  }
}

void apply(Unary op, const Tensor2D& x, Tensor2D& out) {
  if (!out.same_shape(x)) out = Tensor2D(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = detail::unary(op, x[i]);
}

}  // namespace pitl::kernels::serial
