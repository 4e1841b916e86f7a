#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "pitl/asm1/asm1.hpp"
#include "pitl/errors.hpp"

using namespace pitl;
using namespace pitl::asm1;

namespace {

Point point(double s_o, double s_s, double s_nh, double x_bh, double x_ba) {
  Point p;
  p.S_O = s_o;
  p.S_S = s_s;
  p.S_NH = s_nh;
  p.x_BH = x_bh;
  p.x_BA = x_ba;
  return p;
}

Params no_aeration() {
  Params k = bsm1_defaults();
  k.kla = 0.0;
  return k;
}

Point random_point(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return point(8.0 * u(rng), 20.0 * u(rng), 5.0 * u(rng), 3000.0 * u(rng), 200.0 * u(rng));
}

SignalProfile constant_signal(const std::string& name, double mean) {
  SignalProfile s;
  s.name = name;
  s.mean = mean;
  return s;
}

DriverProfile constant_profile(double s_s, double s_nh, double x_bh, double x_ba) {
  DriverProfile p;
  p.signals = {constant_signal("S_S", s_s), constant_signal("S_NH", s_nh), constant_signal("x_BH", x_bh),
               constant_signal("x_BA", x_ba)};
  return p;
}

double max_abs_diff(const std::vector<Point>& a, const std::vector<Point>& ref, std::size_t stride) {
  double e = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) e = std::max(e, std::abs(a[k].S_O - ref[k * stride].S_O));
  return e;
}

}  // namespace

TEST(DoRate, Examples) {
  const Params k = no_aeration();
  EXPECT_EQ(do_rate(point(0.0, 5.0, 2.0, 2000.0, 100.0), k), 0.0);
  EXPECT_EQ(do_rate(point(2.0, 5.0, 2.0, 0.0, 0.0), k), 0.0);

  Params h = no_aeration();
  h.Y_H = 0.5;
  h.mu_H = 1.0;
  h.K_S = 1.0;
  h.K_OH = 1.0;
  EXPECT_DOUBLE_EQ(do_rate(point(1.0, 1.0, 0.0, 1.0, 0.0), h), -0.25);

  EXPECT_THROW(do_rate(point(-0.1, 1.0, 1.0, 1.0, 1.0), k), DomainError);
  EXPECT_THROW(do_rate(point(1.0, 1.0, -1.0, 1.0, 1.0), k), DomainError);
}

TEST(DoRate, AerationTerm) {
  Params k = bsm1_defaults();
  k.kla = 10.0;
  k.so_sat = 8.0;
  EXPECT_DOUBLE_EQ(do_rate(point(3.0, 0.0, 0.0, 0.0, 0.0), k), 50.0);
}

TEST(DoRate, ConsumptionSignAndMonotonicity) {
  std::mt19937_64 rng(21);
  const Params k = no_aeration();
  for (int i = 0; i < 500; ++i) {
    Point p = random_point(rng);
    const double r = do_rate(p, k);
    EXPECT_LE(r, 0.0);
    Point q = p;
    q.S_O += 0.5;
    EXPECT_GE(std::abs(do_rate(q, k)), std::abs(r));
  }
}

TEST(DoRate, DerivativeMatchesFiniteDifference) {
  std::mt19937_64 rng(22);
  Params k = bsm1_defaults();
  k.kla = 50.0;
  for (int i = 0; i < 200; ++i) {
    Point p = random_point(rng);
    p.S_O += 0.01;
    const double h = 1e-6;
    Point a = p, b = p;
    a.S_O += h;
    b.S_O -= h;
    const double fd = (do_rate(a, k) - do_rate(b, k)) / (2 * h);
    EXPECT_NEAR(do_rate_dso(p, k), fd, 1e-6 * std::max(1.0, std::abs(fd)));
  }
}

TEST(Params, Validation) {
  EXPECT_NO_THROW(bsm1_defaults().validate());
  Params p = bsm1_defaults();
  p.Y_H = 1.2;
  EXPECT_THROW(p.validate(), ConfigError);
  p = bsm1_defaults();
  p.K_S = 0.0;
  EXPECT_THROW(p.validate(), ConfigError);
  EXPECT_EQ(to_json(params_from_json(to_json(bsm1_defaults()))), to_json(bsm1_defaults()));
  EXPECT_THROW(params_from_json({{"bogus", 1.0}}), ConfigError);
}

TEST(Drivers, ConstantWithoutAmplitudes) {
  const DriverSeries d = gen_drivers(4, 20.0, constant_profile(3.0, 1.5, 100.0, 7.0));
  ASSERT_EQ(d.time.size(), 21u);
  for (std::size_t s = 0; s < d.names.size(); ++s)
    for (double v : d.values[s]) EXPECT_EQ(v, d.values[s][0]);
  EXPECT_EQ(d.at("S_NH", 3.3), 1.5);
}

TEST(Drivers, Determinism) {
  const DriverSeries a = gen_drivers(9, 100.0, open_source_profile());
  const DriverSeries b = gen_drivers(9, 100.0, open_source_profile());
  const DriverSeries c = gen_drivers(10, 100.0, open_source_profile());
  EXPECT_EQ(a.values, b.values);
  EXPECT_NE(a.values, c.values);
}

TEST(Drivers, SinusoidBounds) {
  DriverProfile p;
  SignalProfile s = constant_signal("x", 10.0);
  s.diurnal_amp = 0.7;
  s.weekly_amp = 0.5;
  s.seasonal_amp = 0.8;
  p.signals = {s};
  p.sample_step = 0.05;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const DriverSeries d = gen_drivers(seed, 400.0, p);
    for (double v : d.values[0]) {
      EXPECT_GE(v, 8.0 - 1e-12);
      EXPECT_LE(v, 12.0 + 1e-12);
    }
  }
}

TEST(Drivers, InterpolatesLinearly) {
  DriverSeries d;
  d.time = {0.0, 1.0, 2.0};
  d.names = {"a"};
  d.values = {{0.0, 4.0, 2.0}};
  EXPECT_DOUBLE_EQ(d.at("a", 0.25), 1.0);
  EXPECT_DOUBLE_EQ(d.at("a", 1.5), 3.0);
  EXPECT_THROW(d.at("a", 2.5), ConfigError);
  EXPECT_THROW(d.index("b"), ConfigError);
}

TEST(Integrate, ZeroBiomassKeepsOxygenConstant) {
  const DriverSeries d = gen_drivers(1, 30.0, constant_profile(5.0, 2.0, 0.0, 0.0));
  for (Method m : {Method::euler_backward, Method::rk4}) {
    Point init;
    init.S_O = 2.7;
    for (const Point& p : integrate(init, d, no_aeration(), 0.5, m)) EXPECT_EQ(p.S_O, 2.7);
  }
}

TEST(Integrate, AerationApproachesSaturationFromBelow) {
  Params k = bsm1_defaults();
  k.kla = 2.0;
  const DriverSeries d = gen_drivers(1, 10.0, constant_profile(5.0, 2.0, 0.0, 0.0));
  for (Method m : {Method::euler_backward, Method::rk4}) {
    Point init;
    init.S_O = 0.5;
    const auto traj = integrate(init, d, k, 0.1, m);
    for (std::size_t i = 1; i < traj.size(); ++i) {
      EXPECT_GT(traj[i].S_O, traj[i - 1].S_O);
      EXPECT_LT(traj[i].S_O, k.so_sat);
    }
    EXPECT_NEAR(traj.back().S_O, k.so_sat, 1e-6);
  }
}

TEST(Integrate, ConsumptionDrivesOxygenDown) {
  const DriverSeries d = gen_drivers(1, 5.0, constant_profile(5.0, 2.0, 50.0, 5.0));
  Point init;
  init.S_O = 4.0;
  const auto traj = integrate(init, d, no_aeration(), 0.01, Method::euler_backward);
  for (std::size_t i = 1; i < traj.size(); ++i) {
    EXPECT_LE(traj[i].S_O, traj[i - 1].S_O);
    EXPECT_GE(traj[i].S_O, 0.0);
  }
}

TEST(Integrate, BackwardEulerIsFirstOrder) {
  Params k = bsm1_defaults();
  k.kla = 4.0;
  DriverProfile prof = constant_profile(4.0, 2.0, 30.0, 4.0);
  prof.signals[0].weekly_amp = 1.5;
  prof.signals[2].seasonal_amp = 10.0;
  prof.signals[2].seasonal_period = 30.0;
  const DriverSeries d = gen_drivers(2, 20.0, prof);
  Point init;
  init.S_O = 1.0;
  const double fine = 1.0 / 512.0;
  const auto ref = integrate(init, d, k, fine, Method::rk4);
  std::vector<double> errs;
  for (double h : {1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0}) {
    const auto be = integrate(init, d, k, h, Method::euler_backward);
    errs.push_back(max_abs_diff(be, ref, static_cast<std::size_t>(h / fine)));
  }
  for (std::size_t i = 1; i < errs.size(); ++i) {
    const double ratio = errs[i - 1] / errs[i];
    EXPECT_GE(ratio, 2.0 * 0.8) << "errors " << errs[i - 1] << " -> " << errs[i];
    EXPECT_LE(ratio, 2.0 * 1.2) << "errors " << errs[i - 1] << " -> " << errs[i];
  }
}

TEST(Integrate, BackwardEulerStepSolvesImplicitEquation) {
  std::mt19937_64 rng(31);
  Params k = bsm1_defaults();
  k.kla = 240.0;
  for (int i = 0; i < 300; ++i) {
    const Point p = random_point(rng);
    const double prev = 8.0 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const double x = backward_euler_step(prev, p, k, 1.0);
    Point q = p;
    q.S_O = x;
    EXPECT_GE(x, 0.0);
    EXPECT_LT(std::abs(x - prev - do_rate(q, k)), 1e-8 * std::max(1.0, std::abs(prev)));
  }
}

TEST(Integrate, Errors) {
  const DriverSeries d = gen_drivers(1, 5.0, constant_profile(1.0, 1.0, 1.0, 1.0));
  Point init;
  init.S_O = -1.0;
  EXPECT_THROW(integrate(init, d, bsm1_defaults(), 0.1, Method::rk4), DomainError);
  init.S_O = 1.0;
  EXPECT_THROW(integrate(init, d, bsm1_defaults(), 0.0, Method::rk4), ConfigError);
  InputMap bad;
  bad.S_S.column = "missing";
  EXPECT_THROW(integrate(init, d, bsm1_defaults(), 0.1, Method::rk4, bad), ConfigError);
}

TEST(Emit, SourceDatasetShape) {
  const Dataset ds = emit_source_dataset(1, 673, bsm1_defaults());
  EXPECT_EQ(ds.rows(), 673u);
  EXPECT_EQ(ds.feature_count(), 8u);
  EXPECT_EQ(ds.target.size(), 673u);
  EXPECT_EQ(ds.time.front(), 0.0);
  EXPECT_NO_THROW(ds.validate());
  for (double v : ds.target) EXPECT_GE(v, 0.0);
}

TEST(Emit, TargetMatchesReintegration) {
  const Params k = bsm1_defaults();
  const Dataset ds = emit_source_dataset(6, 120, k);
  const DriverSeries d = gen_drivers(6, 119.0 + kWarmupDays, open_source_profile());
  Point init;
  init.S_O = 0.5 * k.so_sat;
  const auto traj = integrate(init, d, k, 1.0, Method::euler_backward);
  ASSERT_EQ(traj.size(), ds.rows() + kWarmupDays);
  for (std::size_t r = 0; r < ds.rows(); ++r) EXPECT_EQ(ds.target[r], traj[r + kWarmupDays].S_O);
  EXPECT_EQ(emit_source_dataset(6, 120, k).target, ds.target);
}
