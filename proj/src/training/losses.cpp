#include "pitl/training/losses.hpp"

#include <cmath>

#include "pitl/errors.hpp"

namespace pitl {

namespace {

void check(std::span<const double> pred, std::span<const double> actual) {
  if (pred.empty()) throw DimensionError("loss of empty vectors");
  if (pred.size() != actual.size()) {
    throw DimensionError("loss: " + std::to_string(pred.size()) + " predictions vs " +
                         std::to_string(actual.size()) + " actual values");
  }
}

}  // namespace

double mse(std::span<const double> pred, std::span<const double> actual) {
  check(pred, actual);
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += (pred[i] - actual[i]) * (pred[i] - actual[i]);
  return s / static_cast<double>(pred.size());
}

double mae(std::span<const double> pred, std::span<const double> actual) {
  check(pred, actual);
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += std::abs(pred[i] - actual[i]);
  return s / static_cast<double>(pred.size());
}

Var mse(Var pred, Var actual) {
  if (pred.value().empty()) throw DimensionError("loss of empty tensors");
  return ad::mean(ad::square(ad::sub(pred, actual)));
}

}  // namespace pitl
