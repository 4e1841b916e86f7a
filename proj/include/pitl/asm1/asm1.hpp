#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "pitl/data/dataset.hpp"

namespace pitl::asm1 {

/// Kinetic and stoichiometric constants of the dissolved-oxygen balance.
/// Concentrations in g/m3, rates in 1/day.
struct Params {
  double Y_H = 0.67;   ///< heterotrophic yield
  double Y_A = 0.24;   ///< autotrophic yield
  double mu_H = 4.0;   ///< max heterotrophic growth rate
  double mu_A = 0.5;   ///< max autotrophic growth rate
  double K_S = 10.0;   ///< substrate half saturation, g COD/m3
  double K_NH = 1.0;   ///< ammonia half saturation, g N/m3
  double K_OH = 0.2;   ///< heterotrophic oxygen half saturation
  double K_OA = 0.4;   ///< autotrophic oxygen half saturation
  double kla = 0.0;    ///< oxygen transfer coefficient; 0 disables aeration
  double so_sat = 8.0; ///< oxygen saturation concentration

  /// Throws ConfigError unless all constants are positive and yields < 1.
  void validate() const;
};

/// Values of the ASM1/BSM1 benchmark parameter set (15 C).
Params bsm1_defaults();
nlohmann::json to_json(const Params& p);
Params params_from_json(const nlohmann::json& j);
/// Reads a defaults document {"version", "source", "params": {...}}.
Params load_params(const std::filesystem::path& path);

/// One time point of the oxygen state and its driving concentrations.
struct Point {
  double t = 0.0;
  double S_O = 0.0;
  double S_S = 0.0;
  double S_NH = 0.0;
  double x_BH = 0.0;
  double x_BA = 0.0;
};

/// dS_O/dt in g O2/m3/day: heterotrophic and autotrophic consumption, plus
/// kla (so_sat - S_O) when kla > 0. Negative concentrations raise DomainError.
double do_rate(const Point& p, const Params& params);
/// d(do_rate)/dS_O.
double do_rate_dso(const Point& p, const Params& params);

/// Sinusoid-plus-noise description of one exogenous signal.
struct SignalProfile {
  std::string name;
  double mean = 1.0;
  double diurnal_amp = 0.0;
  double weekly_amp = 0.0;
  double seasonal_amp = 0.0;
  double seasonal_period = 365.0;
  double phase = 0.0;
  double trend_per_day = 0.0;
  /// Stationary std of the AR(1) noise.
  double noise_amp = 0.0;
  /// Lag-one correlation of the noise between samples.
  double noise_corr = 0.9;
};

struct DriverProfile {
  std::vector<SignalProfile> signals;
  double sample_step = 1.0;  ///< days between samples
};

/// Uniformly sampled exogenous signals, linearly interpolated between samples.
struct DriverSeries {
  std::vector<double> time;
  std::vector<std::string> names;
  std::vector<std::vector<double>> values;

  std::size_t index(const std::string& name) const;
  double at(std::size_t signal, double t) const;
  double at(const std::string& name, double t) const { return at(index(name), t); }
};

/// Samples t = 0, step, ..., horizon. Every signal has its own stream derived
/// from (seed, signal index); values are clamped at zero.
DriverSeries gen_drivers(std::uint64_t seed, double horizon_days, const DriverProfile& profile);

/// Where the rate inputs come from: each is `scale * column` of a driver
/// series or dataset.
struct InputMap {
  struct Term {
    std::string column;
    double scale = 1.0;
  };
  Term S_S{"S_S"};
  Term S_NH{"S_NH"};
  Term x_BH{"x_BH"};
  Term x_BA{"x_BA"};
};

nlohmann::json to_json(const InputMap& m);
InputMap input_map_from_json(const nlohmann::json& j);

enum class Method { euler_backward, rk4 };

/// Integrates S_O from `initial.S_O` at `initial.t` up to the last driver time
/// with fixed `step`; the remaining fields of `initial` are ignored.
/// Backward Euler solves its implicit scalar equation by damped Newton
/// iteration to |delta| < 1e-10 (IntegrationError after 100 iterations).
std::vector<Point> integrate(const Point& initial, const DriverSeries& drivers, const Params& params, double step,
                             Method method, const InputMap& map = {});

/// One backward Euler step from s_o_prev to the point `next` (its S_O ignored).
double backward_euler_step(double s_o_prev, Point next, const Params& params, double dt);

/// Influent profile of the simulated source plant.
DriverProfile open_source_profile();
/// Eight regression features of the simulated source plant.
const std::vector<std::string>& open_source_features();

/// Days simulated and discarded before the first emitted row.
inline constexpr std::size_t kWarmupDays = 30;

/// Daily table of `features` (driver signals) and S_O, produced by gen_drivers
/// + backward Euler with dt = 1 day. Time starts at 0 after the warm-up.
Dataset emit_dataset(const std::string& name, std::uint64_t seed, std::size_t n_points, const Params& params,
                     const DriverProfile& profile, const InputMap& map, const std::vector<std::string>& features);

/// emit_dataset with the source-plant profile and its eight features.
Dataset emit_source_dataset(std::uint64_t seed, std::size_t n_points, const Params& params);

}  // namespace pitl::asm1
