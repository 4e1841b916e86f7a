#include "pitl/numgrad/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pitl/errors.hpp"

namespace pitl {

Tensor2D::Tensor2D(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

Tensor2D::Tensor2D(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows * cols) {
    throw DimensionError("tensor of shape " + shape_str() + " given " +
                         std::to_string(values_.size()) + " values");
  }
}

Tensor2D Tensor2D::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> v;
  v.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("ragged row list");
    v.insert(v.end(), row.begin(), row.end());
  }
  return Tensor2D(r, c, std::move(v));
}

Tensor2D Tensor2D::identity(std::size_t n) {
  Tensor2D t(n, n);
  for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

void Tensor2D::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

bool Tensor2D::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
}

double Tensor2D::sum() const noexcept {
  return std::accumulate(values_.begin(), values_.end(), 0.0);
}

std::string Tensor2D::shape_str() const {
  return "(" + std::to_string(rows_) + "x" + std::to_string(cols_) + ")";
}

}  // namespace pitl
