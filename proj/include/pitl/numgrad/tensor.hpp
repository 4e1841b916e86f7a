#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace pitl {

/// Dense row-major matrix of doubles.
class Tensor2D {
 public:
  Tensor2D() = default;
  Tensor2D(std::size_t rows, std::size_t cols, double fill = 0.0);
  Tensor2D(std::size_t rows, std::size_t cols, std::vector<double> values);

  /// Builds a tensor from nested row lists; all rows must have equal length.
  static Tensor2D from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor2D identity(std::size_t n);
  static Tensor2D scalar(double v) { return Tensor2D(1, 1, v); }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  std::span<double> data() noexcept { return values_; }
  std::span<const double> data() const noexcept { return values_; }
  std::span<const double> row(std::size_t r) const { return data().subspan(r * cols_, cols_); }
  const std::vector<double>& values() const noexcept { return values_; }

  bool same_shape(const Tensor2D& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  void fill(double v);
  bool all_finite() const noexcept;
  double sum() const noexcept;

  std::string shape_str() const;

  friend bool operator==(const Tensor2D&, const Tensor2D&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

}  // namespace pitl
