#include "pitl/asm1/asm1.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "pitl/errors.hpp"
#include "pitl/numgrad/init.hpp"

namespace pitl::asm1 {

void Params::validate() const {
  const double positive[] = {Y_H, Y_A, mu_H, mu_A, K_S, K_NH, K_OH, K_OA, so_sat};
  for (double v : positive) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("ASM1 constants must be finite and positive");
  }
  if (Y_H >= 1.0 || Y_A >= 1.0) throw ConfigError("ASM1 yields must be below 1");
  if (!(kla >= 0.0)) throw ConfigError("kla must be >= 0");
}

Params bsm1_defaults() {
  Params p;
  p.kla = 240.0;
  return p;
}

nlohmann::json to_json(const Params& p) {
  return {{"Y_H", p.Y_H},   {"Y_A", p.Y_A},   {"mu_H", p.mu_H}, {"mu_A", p.mu_A}, {"K_S", p.K_S},
          {"K_NH", p.K_NH}, {"K_OH", p.K_OH}, {"K_OA", p.K_OA}, {"kla", p.kla},   {"so_sat", p.so_sat}};
}

Params params_from_json(const nlohmann::json& j) {
  static const char* const kKeys[] = {"Y_H", "Y_A", "mu_H", "mu_A", "K_S", "K_NH", "K_OH", "K_OA", "kla", "so_sat"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys)) {
      throw ConfigError("unknown ASM1 parameter '" + key + "'");
    }
  }
  Params p;
  p.Y_H = j.value("Y_H", p.Y_H);
  p.Y_A = j.value("Y_A", p.Y_A);
  p.mu_H = j.value("mu_H", p.mu_H);
  p.mu_A = j.value("mu_A", p.mu_A);
  p.K_S = j.value("K_S", p.K_S);
  p.K_NH = j.value("K_NH", p.K_NH);
  p.K_OH = j.value("K_OH", p.K_OH);
  p.K_OA = j.value("K_OA", p.K_OA);
  p.kla = j.value("kla", p.kla);
  p.so_sat = j.value("so_sat", p.so_sat);
  p.validate();
  return p;
}

Params load_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open ASM1 defaults " + path.string());
  try {
    const nlohmann::json doc = nlohmann::json::parse(in);
    return params_from_json(doc.at("params"));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

nlohmann::json to_json(const InputMap& m) {
  auto term = [](const InputMap::Term& t) { return nlohmann::json{{"column", t.column}, {"scale", t.scale}}; };
  return {{"S_S", term(m.S_S)}, {"S_NH", term(m.S_NH)}, {"x_BH", term(m.x_BH)}, {"x_BA", term(m.x_BA)}};
}

InputMap input_map_from_json(const nlohmann::json& j) {
  InputMap m;
  auto term = [&](const char* key, InputMap::Term& t) {
    if (!j.contains(key)) throw ConfigError(std::string("input map lacks '") + key + "'");
    const auto& e = j.at(key);
    for (const auto& [k, _] : e.items()) {
      if (k != "column" && k != "scale") throw ConfigError("unknown input map key '" + k + "'");
    }
    t.column = e.at("column").get<std::string>();
    t.scale = e.value("scale", 1.0);
  };
  for (const auto& [k, _] : j.items()) {
    if (k != "S_S" && k != "S_NH" && k != "x_BH" && k != "x_BA") {
      throw ConfigError("unknown input map entry '" + k + "'");
    }
  }
  term("S_S", m.S_S);
  term("S_NH", m.S_NH);
  term("x_BH", m.x_BH);
  term("x_BA", m.x_BA);
  return m;
}

namespace {

void check_domain(const Point& p) {
  if (p.S_O < 0.0 || p.S_S < 0.0 || p.S_NH < 0.0 || p.x_BH < 0.0 || p.x_BA < 0.0) {
    throw DomainError("negative concentration at t = " + std::to_string(p.t));
  }
}

// Coefficients of the two Monod oxygen factors at fixed substrates and biomass.
struct Uptake {
  double heterotrophic;
  double autotrophic;
};

Uptake uptake(const Point& p, const Params& k) {
  return {(1.0 - k.Y_H) / k.Y_H * k.mu_H * (p.S_S / (k.K_S + p.S_S)) * p.x_BH,
          (4.57 - k.Y_A) / k.Y_A * k.mu_A * (p.S_NH / (k.K_NH + p.S_NH)) * p.x_BA};
}

}  // namespace

double do_rate(const Point& p, const Params& params) {
  check_domain(p);
  const Uptake u = uptake(p, params);
  double rate = -u.heterotrophic * (p.S_O / (params.K_OH + p.S_O)) - u.autotrophic * (p.S_O / (params.K_OA + p.S_O));
  if (params.kla > 0.0) rate += params.kla * (params.so_sat - p.S_O);
  return rate;
}

double do_rate_dso(const Point& p, const Params& params) {
  check_domain(p);
  const Uptake u = uptake(p, params);
  const double dh = params.K_OH / ((params.K_OH + p.S_O) * (params.K_OH + p.S_O));
  const double da = params.K_OA / ((params.K_OA + p.S_O) * (params.K_OA + p.S_O));
  return -u.heterotrophic * dh - u.autotrophic * da - params.kla;
}

std::size_t DriverSeries::index(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return i;
  throw ConfigError("driver series has no signal '" + name + "'");
}

double DriverSeries::at(std::size_t signal, double t) const {
  const auto& v = values.at(signal);
  if (time.empty()) throw ConfigError("empty driver series");
  const double eps = 1e-9 * std::max(1.0, std::abs(time.back()));
  if (t < time.front() - eps || t > time.back() + eps) {
    throw ConfigError("driver series does not cover t = " + std::to_string(t));
  }
  if (time.size() == 1) return v.front();
  const double step = (time.back() - time.front()) / static_cast<double>(time.size() - 1);
  const double pos = std::clamp((t - time.front()) / step, 0.0, static_cast<double>(time.size() - 1));
  const auto i = std::min(static_cast<std::size_t>(pos), time.size() - 2);
  const double w = pos - static_cast<double>(i);
  if (w == 0.0) return v[i];
  return v[i] + w * (v[i + 1] - v[i]);
}

DriverSeries gen_drivers(std::uint64_t seed, double horizon_days, const DriverProfile& profile) {
  if (!(horizon_days >= 1.0)) throw ConfigError("driver horizon must be >= 1 day");
  if (!(profile.sample_step > 0.0)) throw ConfigError("driver sample step must be positive");
  const auto n = static_cast<std::size_t>(std::floor(horizon_days / profile.sample_step + 1e-9)) + 1;
  DriverSeries out;
  out.time.resize(n);
  for (std::size_t k = 0; k < n; ++k) out.time[k] = static_cast<double>(k) * profile.sample_step;

  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t s = 0; s < profile.signals.size(); ++s) {
    const SignalProfile& sp = profile.signals[s];
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(s)};
    Rng rng(seq);
    std::normal_distribution<double> unit(0.0, 1.0);
    const double rho = std::clamp(sp.noise_corr, 0.0, 0.999999);
    const double innovation = std::sqrt(1.0 - rho * rho);
    double noise = sp.noise_amp > 0.0 ? sp.noise_amp * unit(rng) : 0.0;

    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double t = out.time[k];
      if (k > 0 && sp.noise_amp > 0.0) noise = rho * noise + innovation * sp.noise_amp * unit(rng);
      double x = sp.mean + sp.trend_per_day * t;
      x += sp.diurnal_amp * std::sin(two_pi * t + sp.phase);
      x += sp.weekly_amp * std::sin(two_pi * t / 7.0 + sp.phase);
      if (sp.seasonal_period > 0.0) x += sp.seasonal_amp * std::sin(two_pi * t / sp.seasonal_period + sp.phase);
      v[k] = std::max(0.0, x + noise);
    }
    out.names.push_back(sp.name);
    out.values.push_back(std::move(v));
  }
  return out;
}

namespace {

struct MappedDrivers {
  std::size_t s_s, s_nh, x_bh, x_ba;
  const DriverSeries* series;
  const InputMap* map;

  Point at(double t, double s_o) const {
    Point p;
    p.t = t;
    p.S_O = s_o;
    p.S_S = map->S_S.scale * series->at(s_s, t);
    p.S_NH = map->S_NH.scale * series->at(s_nh, t);
    p.x_BH = map->x_BH.scale * series->at(x_bh, t);
    p.x_BA = map->x_BA.scale * series->at(x_ba, t);
    return p;
  }
};

constexpr int kMaxIterations = 100;
constexpr double kTolerance = 1e-10;

}  // namespace

double backward_euler_step(double s_o_prev, Point next, const Params& params, double dt) {
  // Root of g(x) = x - s_o_prev - dt f(x). g is increasing and concave in x and
  // g(0) <= 0, so Newton from the left of the root approaches it monotonically;
  // steps that would cross below zero are halved.
  auto g = [&](double x) {
    next.S_O = x;
    return x - s_o_prev - dt * do_rate(next, params);
  };
  double x = s_o_prev;
  if (g(x) > 0.0) x = 0.0;
  for (int it = 0; it < kMaxIterations; ++it) {
    next.S_O = x;
    const double gx = g(x);
    const double slope = 1.0 - dt * do_rate_dso(next, params);
    double delta = -gx / slope;
    while (x + delta < 0.0) delta *= 0.5;
    x += delta;
    if (std::abs(delta) < kTolerance) return x;
  }
  throw IntegrationError("backward Euler did not converge at t = " + std::to_string(next.t));
}

std::vector<Point> integrate(const Point& initial, const DriverSeries& drivers, const Params& params, double step,
                             Method method, const InputMap& map) {
  params.validate();
  if (!(step > 0.0)) throw ConfigError("integration step must be positive");
  if (initial.S_O < 0.0) throw DomainError("negative initial S_O");
  if (drivers.time.empty()) throw ConfigError("empty driver series");
  const MappedDrivers md{drivers.index(map.S_S.column), drivers.index(map.S_NH.column),
                         drivers.index(map.x_BH.column), drivers.index(map.x_BA.column), &drivers, &map};
  const double t_end = drivers.time.back();
  const auto n_steps = static_cast<std::size_t>(std::llround((t_end - initial.t) / step));
  if (initial.t < drivers.time.front() || n_steps == 0) {
    throw ConfigError("driver series does not cover the integration horizon");
  }

  std::vector<Point> traj;
  traj.reserve(n_steps + 1);
  traj.push_back(md.at(initial.t, initial.S_O));
  double s_o = initial.S_O;
  for (std::size_t k = 1; k <= n_steps; ++k) {
    const double t_prev = initial.t + static_cast<double>(k - 1) * step;
    const double t = std::min(initial.t + static_cast<double>(k) * step, t_end);
    const double h = t - t_prev;
    if (method == Method::euler_backward) {
      s_o = backward_euler_step(s_o, md.at(t, 0.0), params, h);
    } else {
      auto f = [&](double tt, double y) { return do_rate(md.at(tt, std::max(0.0, y)), params); };
      const double k1 = f(t_prev, s_o);
      const double k2 = f(t_prev + 0.5 * h, s_o + 0.5 * h * k1);
      const double k3 = f(t_prev + 0.5 * h, s_o + 0.5 * h * k2);
      const double k4 = f(t, s_o + h * k3);
      s_o += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    s_o = std::max(0.0, s_o);
    if (!std::isfinite(s_o)) throw IntegrationError("non-finite S_O at t = " + std::to_string(t));
    traj.push_back(md.at(t, s_o));
  }
  return traj;
}

DriverProfile open_source_profile() {
  DriverProfile p;
  //            name     mean    diurnal weekly seasonal period phase trend noise  corr
  p.signals = {{"S_S", 1.6, 0.3, 0.25, 0.6, 210.0, 0.3, 0.0, 0.25, 0.8},
               {"X_S", 60.0, 8.0, 6.0, 15.0, 240.0, 1.1, 0.0, 5.0, 0.8},
               {"X_I", 1150.0, 20.0, 30.0, 120.0, 300.0, 2.0, 0.0, 25.0, 0.9},
               {"Q", 18400.0, 3000.0, 1500.0, 3500.0, 190.0, 0.7, 0.0, 900.0, 0.7},
               {"S_ND", 0.8, 0.1, 0.08, 0.2, 200.0, 1.7, 0.0, 0.06, 0.8},
               {"X_ND", 4.0, 0.5, 0.4, 1.0, 230.0, 2.5, 0.0, 0.3, 0.8},
               {"x_BH", 2550.0, 0.0, 60.0, 550.0, 260.0, 0.9, 0.0, 90.0, 0.95},
               {"S_NH", 2.2, 0.6, 0.5, 1.3, 170.0, 0.1, 0.0, 0.35, 0.8},
               {"x_BA", 150.0, 0.0, 4.0, 35.0, 260.0, 1.2, 0.0, 6.0, 0.95}};
  return p;
}

const std::vector<std::string>& open_source_features() {
  static const std::vector<std::string> kFeatures{"S_S", "X_S", "X_I", "Q", "S_ND", "X_ND", "x_BH", "S_NH"};
  return kFeatures;
}

Dataset emit_dataset(const std::string& name, std::uint64_t seed, std::size_t n_points, const Params& params,
                     const DriverProfile& profile, const InputMap& map, const std::vector<std::string>& features) {
  if (n_points < 2) throw ConfigError("a dataset needs at least 2 points");
  const double horizon = static_cast<double>(n_points - 1 + kWarmupDays);
  const DriverSeries drivers = gen_drivers(seed, horizon, profile);
  const double t0 = drivers.time.front();
  Point initial;
  initial.t = t0;
  initial.S_O = 0.5 * params.so_sat;
  const std::vector<Point> traj = integrate(initial, drivers, params, 1.0, Method::euler_backward, map);

  Dataset ds;
  ds.name = name;
  ds.target_name = "S_O";
  ds.provenance = "ASM1 oxygen balance, backward Euler dt = 1 d, kla = " + std::to_string(params.kla) +
                  ", driver seed " + std::to_string(seed);
  ds.feature_names = features;
  ds.features.resize(features.size());
  std::vector<std::size_t> idx;
  for (const auto& f : features) idx.push_back(drivers.index(f));
  for (std::size_t k = kWarmupDays; k < traj.size(); ++k) {
    ds.time.push_back(traj[k].t - static_cast<double>(kWarmupDays));
    for (std::size_t c = 0; c < features.size(); ++c) ds.features[c].push_back(drivers.values[idx[c]][k]);
    ds.target.push_back(traj[k].S_O);
  }
  return ds;
}

Dataset emit_source_dataset(std::uint64_t seed, std::size_t n_points, const Params& params) {
  return emit_dataset("source_open", seed, n_points, params, open_source_profile(), InputMap{},
                      open_source_features());
}

}  // namespace pitl::asm1
