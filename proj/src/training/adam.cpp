#include "pitl/training/adam.hpp"

#include <cmath>

#include "pitl/errors.hpp"

namespace pitl {

void AdamConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in (0, 1)");
  }
  if (!(epsilon > 0.0)) throw ConfigError("Adam epsilon must be > 0");
}

void adam_step(std::span<Param* const> params, AdamState& state, const AdamConfig& cfg) {
  if (state.m.empty() && state.t == 0) {
    for (const Param* p : params) {
      state.m.emplace_back(p->value.rows(), p->value.cols());
      state.v.emplace_back(p->value.rows(), p->value.cols());
    }
  }
  if (state.m.size() != params.size()) throw StateError("Adam state belongs to a different parameter list");
  for (std::size_t k = 0; k < params.size(); ++k) {
    const Param& p = *params[k];
    if (!state.m[k].same_shape(p.value)) throw StateError("Adam moment shape differs for '" + p.name + "'");
    if (!p.frozen && !p.grad_ready) throw StateError("parameter '" + p.name + "' has no gradient");
  }

  ++state.t;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Param& p = *params[k];
    if (p.frozen) continue;
    Tensor2D& m = state.m[k];
    Tensor2D& v = state.v[k];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      p.value[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
  }
}

}  // namespace pitl
