#include "pitl/training/physics.hpp"

#include <algorithm>
#include <cmath>

#include "pitl/errors.hpp"
#include "pitl/training/losses.hpp"

namespace pitl {

void PhysicsLossConfig::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("physics weight alpha must be >= 0");
  if (!(dt > 0.0)) throw ConfigError("physics time increment dt must be > 0");
  if (!(target_range.max > target_range.min)) throw ConfigError("physics target range is degenerate");
  rate_params.validate();
}

asm1::Params PhysicsLossConfig::effective_params() const {
  asm1::Params p = rate_params;
  if (!include_aeration) p.kla = 0.0;
  return p;
}

namespace {

std::vector<double> cut(const std::vector<double>& v, std::size_t begin, std::size_t end) {
  return {v.begin() + static_cast<std::ptrdiff_t>(begin), v.begin() + static_cast<std::ptrdiff_t>(end)};
}

const std::vector<double>& mapped_column(const Dataset& raw, const asm1::InputMap::Term& term) {
  for (std::size_t i = 0; i < raw.feature_names.size(); ++i) {
    if (raw.feature_names[i] == term.column) return raw.features[i];
  }
  throw ConfigError("physics input column '" + term.column + "' is missing from dataset '" + raw.name + "'");
}

// Uptake coefficients that multiply the two Monod oxygen factors.
void uptake(const OdeInputs& x, std::size_t i, const asm1::Params& k, double& het, double& aut) {
  het = (1.0 - k.Y_H) / k.Y_H * k.mu_H * (x.S_S[i] / (k.K_S + x.S_S[i])) * x.x_BH[i];
  aut = (4.57 - k.Y_A) / k.Y_A * k.mu_A * (x.S_NH[i] / (k.K_NH + x.S_NH[i])) * x.x_BA[i];
}

}  // namespace

OdeInputs OdeInputs::slice(std::size_t begin, std::size_t end) const {
  return {cut(S_S, begin, end), cut(S_NH, begin, end), cut(x_BH, begin, end), cut(x_BA, begin, end)};
}

OdeInputs gather_ode_inputs(const Dataset& raw, const asm1::InputMap& map, std::span<const std::size_t> rows) {
  const auto& s_s = mapped_column(raw, map.S_S);
  const auto& s_nh = mapped_column(raw, map.S_NH);
  const auto& x_bh = mapped_column(raw, map.x_BH);
  const auto& x_ba = mapped_column(raw, map.x_BA);
  OdeInputs out;
  for (std::size_t r : rows) {
    if (r >= raw.rows()) throw DimensionError("physics row index out of range");
    out.S_S.push_back(map.S_S.scale * s_s[r]);
    out.S_NH.push_back(map.S_NH.scale * s_nh[r]);
    out.x_BH.push_back(map.x_BH.scale * x_bh[r]);
    out.x_BA.push_back(map.x_BA.scale * x_ba[r]);
  }
  return out;
}

double physics_residual(std::span<const double> y, std::span<const double> y_hat, const OdeInputs& exog,
                        const PhysicsLossConfig& cfg) {
  const std::size_t n = y.size();
  if (n < 2) throw DimensionError("physics residual needs at least 2 points");
  if (y_hat.size() != n || exog.size() != n) throw DimensionError("physics residual: series are not aligned");
  const asm1::Params k = cfg.effective_params();
  double s = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    asm1::Point p;
    p.S_O = std::max(0.0, y_hat[i]);
    p.S_S = exog.S_S[i];
    p.S_NH = exog.S_NH[i];
    p.x_BH = exog.x_BH[i];
    p.x_BA = exog.x_BA[i];
    const double r = y[i] - y[i - 1] - cfg.dt * asm1::do_rate(p, k);
    s += r * r;
  }
  return s / static_cast<double>(n);
}

PhysicsTargets PhysicsTargets::slice(std::size_t begin, std::size_t end) const {
  return {cut(y, begin, end), exog.slice(begin, end)};
}

PhysicsTargets make_physics_targets(const Dataset& raw, const WindowBatch& windows, const asm1::InputMap& map) {
  PhysicsTargets t;
  t.exog = gather_ode_inputs(raw, map, windows.target_rows);
  for (std::size_t r : windows.target_rows) t.y.push_back(raw.target[r]);
  return t;
}

Var physics_term(Var y_hat_normalized, const PhysicsTargets& targets, const PhysicsLossConfig& cfg) {
  const std::size_t n = targets.size();
  if (n < 2) throw DimensionError("physics residual needs at least 2 points");
  if (y_hat_normalized.rows() != n || y_hat_normalized.cols() != 1) {
    throw DimensionError("physics term: predictions " + y_hat_normalized.value().shape_str() + " for " +
                         std::to_string(n) + " targets");
  }
  Tape& tape = y_hat_normalized.tape();
  const asm1::Params k = cfg.effective_params();
  const double span = cfg.target_range.max - cfg.target_range.min;

  Tensor2D het(n - 1, 1), aut(n - 1, 1), lhs(n - 1, 1);
  for (std::size_t i = 1; i < n; ++i) {
    uptake(targets.exog, i, k, het(i - 1, 0), aut(i - 1, 0));
    lhs(i - 1, 0) = targets.y[i] - targets.y[i - 1];
  }

  // Prediction in g O2/m3, floored at zero before entering the rate.
  const Var s_o = ad::clamp_min(
      ad::add_scalar(ad::scale(ad::slice_rows(y_hat_normalized, 1, n), 0.5 * span), 0.5 * span + cfg.target_range.min),
      0.0);
  const Var monod_h = ad::div(s_o, ad::add_scalar(s_o, k.K_OH));
  const Var monod_a = ad::div(s_o, ad::add_scalar(s_o, k.K_OA));
  Var rate = ad::scale(ad::add(ad::mul(tape.constant(std::move(het)), monod_h),
                               ad::mul(tape.constant(std::move(aut)), monod_a)),
                       -1.0);
  if (k.kla > 0.0) rate = ad::add(rate, ad::add_scalar(ad::scale(s_o, -k.kla), k.kla * k.so_sat));
  const Var residual = ad::sub(tape.constant(std::move(lhs)), ad::scale(rate, cfg.dt));
  return ad::scale(ad::sum(ad::square(residual)), 1.0 / static_cast<double>(n));
}

double objective(std::span<const double> pred, std::span<const double> actual,
                 const std::optional<double>& physics_residual_value, double alpha) {
  double value = mse(pred, actual);
  if (physics_residual_value && alpha != 0.0) value += alpha * *physics_residual_value;
  return value;
}

}  // namespace pitl
