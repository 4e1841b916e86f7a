#include "pitl/numgrad/init.hpp"

#include <cmath>

namespace pitl {

Tensor2D glorot_uniform(std::size_t rows, std::size_t cols, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Tensor2D t(rows, cols);
  for (double& v : t.data()) v = dist(rng);
  return t;
}

}  // namespace pitl
