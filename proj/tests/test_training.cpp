#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "pitl/asm1/asm1.hpp"
#include "pitl/cells/model.hpp"
#include "pitl/errors.hpp"
#include "pitl/numgrad/grad_check.hpp"
#include "pitl/training/adam.hpp"
#include "pitl/training/losses.hpp"
#include "pitl/training/physics.hpp"
#include "pitl/training/trainer.hpp"
#include "test_util.hpp"

using namespace pitl;
using pitl::testing::random_vector;

namespace {

// Dataset whose features are the four physics inputs plus one extra column.
Dataset physics_table(std::size_t rows, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Dataset ds;
  ds.name = "phys";
  for (std::size_t r = 0; r < rows; ++r) ds.time.push_back(static_cast<double>(r));
  ds.feature_names = {"S_S", "S_NH", "x_BH", "x_BA", "other"};
  ds.features = {random_vector(rng, rows, 0.5, 6.0), random_vector(rng, rows, 0.2, 4.0),
                 random_vector(rng, rows, 10.0, 60.0), random_vector(rng, rows, 1.0, 6.0),
                 random_vector(rng, rows, -1.0, 1.0)};
  ds.target = random_vector(rng, rows, 1.0, 7.0);
  return ds;
}

WindowBatch linear_windows(std::size_t n) {
  Dataset ds;
  ds.name = "lin";
  ds.feature_names = {"x"};
  ds.features.resize(1);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n - 1);
    ds.time.push_back(static_cast<double>(i));
    ds.features[0].push_back(x);
    ds.target.push_back(2.0 * x);
  }
  return make_windows(ds, 1);
}

std::vector<Tensor2D> snapshot(Model& m) {
  std::vector<Tensor2D> out;
  for (const Param* p : m.parameters()) out.push_back(p->value);
  return out;
}

PhysicsLossConfig physics_cfg(double alpha, bool aeration) {
  PhysicsLossConfig c;
  c.alpha = alpha;
  c.include_aeration = aeration;
  c.rate_params.kla = 3.0;
  c.target_range = {1.0, 8.0};
  return c;
}

}  // namespace

TEST(Losses, Examples) {
  const std::vector<double> a{0.3, -2.0, 5.0};
  EXPECT_EQ(mse(a, a), 0.0);
  EXPECT_EQ(mae(a, a), 0.0);
  EXPECT_EQ(mse(std::vector<double>{1, 2}, std::vector<double>{0, 0}), 2.5);
  EXPECT_EQ(mae(std::vector<double>{1, -1}, std::vector<double>{0, 0}), 1.0);
  EXPECT_THROW(mse(std::vector<double>{}, std::vector<double>{}), DimensionError);
  EXPECT_THROW(mae(std::vector<double>{1}, std::vector<double>{1, 2}), DimensionError);
}

TEST(Losses, NaiveOracleAndCauchySchwarz) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = random_vector(rng, 100, -3.0, 3.0);
    const auto q = random_vector(rng, 100, -3.0, 3.0);
    long double sq = 0.0L, ab = 0.0L;
    for (std::size_t i = 0; i < 100; ++i) {
      sq += static_cast<long double>(p[i] - q[i]) * (p[i] - q[i]);
      ab += std::abs(static_cast<long double>(p[i] - q[i]));
    }
    const double m = mse(p, q);
    const double a = mae(p, q);
    EXPECT_NEAR(m, static_cast<double>(sq / 100), 1e-13);
    EXPECT_NEAR(a, static_cast<double>(ab / 100), 1e-13);
    EXPECT_GE(m, 0.0);
    EXPECT_LE(a * a, m * (1.0 + 1e-15));
  }
}

TEST(Losses, TapeMseMatchesScalar) {
  std::mt19937_64 rng(6);
  Tape t;
  const Tensor2D p = pitl::testing::random_tensor(rng, 17, 1);
  const Tensor2D q = pitl::testing::random_tensor(rng, 17, 1);
  EXPECT_NEAR(mse(t.constant(p), t.constant(q)).value()[0], mse(p.values(), q.values()), 1e-15);
}

TEST(Objective, Examples) {
  const std::vector<double> p{0.2, 0.0}, a{0.0, 0.0};
  EXPECT_DOUBLE_EQ(objective(p, a, std::nullopt, 0.1), mse(p, a));
  EXPECT_EQ(objective(p, a, 5.0, 0.0), mse(p, a));
  EXPECT_NEAR(objective(std::vector<double>{0.2, 0.2}, std::vector<double>{0.0, 0.0}, 0.2, 0.1), 0.06, 1e-15);
  EXPECT_EQ(objective(a, a, 0.0, 0.1), 0.0);
}

TEST(PhysicsResidual, HandExamples) {
  PhysicsLossConfig c = physics_cfg(1.0, false);
  OdeInputs none{{0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}};
  // f is identically zero without biomass or aeration
  EXPECT_EQ(physics_residual(std::vector<double>{0.0, 1.0}, std::vector<double>{0.0, 1.0}, none, c), 0.5);
  c.include_aeration = true;
  c.rate_params.kla = 0.5;
  c.rate_params.so_sat = 2.0;
  // f = 0.5 (2 - 1) = 0.5 at y_hat = 1
  EXPECT_EQ(physics_residual(std::vector<double>{1.0, 1.5}, std::vector<double>{9.0, 1.0}, none, c), 0.0);
  EXPECT_THROW(physics_residual(std::vector<double>{1.0}, std::vector<double>{1.0}, none.slice(0, 1), c),
               DimensionError);
}

TEST(PhysicsResidual, ZeroOnBackwardEulerTrajectory) {
  for (bool aeration : {false, true}) {
    PhysicsLossConfig c = physics_cfg(1.0, aeration);
    c.rate_params.kla = aeration ? 240.0 : 0.0;
    asm1::DriverProfile prof = asm1::open_source_profile();
    const asm1::DriverSeries d = asm1::gen_drivers(8, 120.0, prof);
    asm1::Point init;
    init.S_O = 6.0;
    const auto traj = asm1::integrate(init, d, c.effective_params(), 1.0, asm1::Method::euler_backward);
    std::vector<double> y;
    OdeInputs x;
    for (const auto& p : traj) {
      if (aeration) ASSERT_GT(p.S_O, 0.0);
      y.push_back(p.S_O);
      x.S_S.push_back(p.S_S);
      x.S_NH.push_back(p.S_NH);
      x.x_BH.push_back(p.x_BH);
      x.x_BA.push_back(p.x_BA);
    }
    // without aeration the series decays to the clamp at zero after a few days
    const std::size_t n = aeration ? y.size() : 4;
    const std::vector<double> ys(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n));
    EXPECT_LT(physics_residual(ys, ys, x.slice(0, n), c), 1e-18);
  }
}

TEST(PhysicsResidual, NonNegativeAndTapeAgrees) {
  std::mt19937_64 rng(9);
  const Dataset raw = physics_table(40, 3);
  const WindowBatch w = make_windows(normalize(raw, fit_stats(raw)), 5);
  const PhysicsTargets pt = make_physics_targets(raw, w, asm1::InputMap{});
  for (bool aeration : {false, true}) {
    const PhysicsLossConfig c = physics_cfg(1.0, aeration);
    const auto yhat_n = random_vector(rng, w.size(), -0.9, 0.9);
    std::vector<double> yhat;
    for (double z : yhat_n) yhat.push_back(c.target_range.denormalize(z));
    const double pr = physics_residual(pt.y, yhat, pt.exog, c);
    EXPECT_GE(pr, 0.0);
    Tape t;
    Tensor2D col(w.size(), 1);
    for (std::size_t i = 0; i < w.size(); ++i) col(i, 0) = yhat_n[i];
    EXPECT_NEAR(physics_term(t.constant(col), pt, c).value()[0], pr, 1e-9 * std::max(1.0, pr));
  }
}

TEST(PhysicsResidual, MissingColumnIsConfigError) {
  Dataset raw = physics_table(10, 1);
  raw.feature_names[2] = "renamed";
  const WindowBatch w = make_windows(raw, 2);
  try {
    make_physics_targets(raw, w, asm1::InputMap{});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("x_BH"), std::string::npos);
  }
}

TEST(PhysicsGradient, ObjectiveMatchesFiniteDifferences) {
  const Dataset raw = physics_table(30, 4);
  const NormStats st = fit_stats(raw);
  const WindowBatch w = make_windows(normalize(raw, st), 3);
  const PhysicsTargets pt = make_physics_targets(raw, w, asm1::InputMap{});
  double worst = 0.0;
  for (CellKind kind : {CellKind::dense, CellKind::simple_rnn, CellKind::lstm, CellKind::gru}) {
    for (bool aeration : {false, true}) {
      for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Model m(ModelSpec::stack(raw.feature_count(), kind, 2, 3), seed);
        PhysicsLossConfig c = physics_cfg(0.05, aeration);
        c.target_range = st.target;
        auto f = [&](Tape& t) {
          const Var pred = m.forward(t, w.steps);
          return ad::add(mse(pred, t.constant(w.targets)), ad::scale(physics_term(pred, pt, c), c.alpha));
        };
        const auto params = m.parameters();
        const GradCheckReport r = grad_check(f, params, 1e-4, 1e-5);
        worst = std::max(worst, r.max_rel_error);
        EXPECT_TRUE(r.passed) << to_string(kind) << " aeration " << aeration << " seed " << seed << ": "
                              << r.max_rel_error;
      }
    }
  }
  RecordProperty("max_rel_error", std::to_string(worst));
}

TEST(Adam, SingleStepOracle) {
  Param p("theta", Tensor2D::scalar(1.0));
  p.grad(0, 0) = 1.0;
  p.grad_ready = true;
  AdamState st;
  Param* ps[] = {&p};
  adam_step(ps, st, AdamConfig{});
  EXPECT_NEAR(p.value[0], 1.0 - 0.001 * 1.0 / (1.0 + 1e-8), 1e-9);
  EXPECT_EQ(st.t, 1u);
}

TEST(Adam, ZeroGradientAndFrozen) {
  Param a("a", Tensor2D::from_rows({{0.5, -0.25}}));
  Param b("b", Tensor2D::from_rows({{3.0}}), true);
  a.grad_ready = true;
  b.grad.fill(7.0);
  AdamState st;
  Param* ps[] = {&a, &b};
  const Tensor2D a0 = a.value, b0 = b.value;
  adam_step(ps, st, AdamConfig{});
  EXPECT_EQ(a.value, a0);
  EXPECT_EQ(b.value, b0);
  EXPECT_EQ(st.t, 1u);
}

TEST(Adam, FrozenNeverMovesProperty) {
  std::mt19937_64 rng(12);
  std::vector<Param> ps;
  for (int i = 0; i < 8; ++i) ps.emplace_back("p" + std::to_string(i), pitl::testing::random_tensor(rng, 3, 2), i % 3 == 0);
  std::vector<Param*> ptrs;
  for (Param& p : ps) ptrs.push_back(&p);
  std::vector<Tensor2D> frozen0;
  for (Param& p : ps) frozen0.push_back(p.value);
  AdamState st;
  for (int step = 0; step < 200; ++step) {
    for (Param& p : ps) {
      p.grad = pitl::testing::random_tensor(rng, 3, 2, -5.0, 5.0);
      p.grad_ready = true;
    }
    adam_step(ptrs, st, AdamConfig{});
  }
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (ps[i].frozen) {
      EXPECT_EQ(ps[i].value, frozen0[i]);
    } else {
      EXPECT_NE(ps[i].value, frozen0[i]);
    }
  }
}

TEST(Adam, MissingGradientIsStateError) {
  Param a("a", Tensor2D::scalar(1.0));
  AdamState st;
  Param* ps[] = {&a};
  EXPECT_THROW(adam_step(ps, st, AdamConfig{}), StateError);
  a.grad_ready = true;
  adam_step(ps, st, AdamConfig{});
  Param extra("x", Tensor2D::scalar(1.0));
  extra.grad_ready = true;
  Param* two[] = {&a, &extra};
  EXPECT_THROW(adam_step(two, st, AdamConfig{}), StateError);
}

TEST(Train, ZeroEpochs) {
  Model m(ModelSpec::stack(1, CellKind::lstm, 1, 3), 1);
  const auto before = snapshot(m);
  TrainConfig c;
  c.epochs = 0;
  EXPECT_TRUE(train(m, linear_windows(10), c).epochs.empty());
  EXPECT_EQ(snapshot(m), before);
}

TEST(Train, LinearTargetWithDenseModel) {
  ModelSpec spec;
  spec.input_width = 1;
  Model m(spec, 3);
  TrainConfig c;
  c.epochs = 2000;
  c.learning_rate = 0.01;
  const WindowBatch w = linear_windows(21);
  const TrainHistory h = train(m, w, c);
  EXPECT_LT(evaluate(m, w).mse, 1e-6);
  EXPECT_NEAR(m.head().param("w").value[0], 2.0, 1e-3);
  EXPECT_EQ(h.epochs.size(), 2000u);
}

TEST(Train, FrozenModelHasConstantHistory) {
  Model m(ModelSpec::stack(1, CellKind::gru, 2, 3), 2);
  for (Layer& l : m.layers()) l.set_frozen(true);
  m.head().set_frozen(true);
  const auto before = snapshot(m);
  TrainConfig c;
  c.epochs = 5;
  const TrainHistory h = train(m, linear_windows(12), c);
  for (const EpochRecord& e : h.epochs) {
    EXPECT_EQ(e.train_mse, h.epochs[0].train_mse);
    EXPECT_EQ(e.train_objective, h.epochs[0].train_objective);
  }
  EXPECT_EQ(snapshot(m), before);
}

TEST(Train, DivergenceReportsEpoch) {
  Model m(ModelSpec::stack(1, CellKind::dense, 1, 2), 1);
  TrainConfig c;
  c.epochs = 10;
  c.divergence_limit = 1e-12;
  try {
    train(m, linear_windows(10), c);
    FAIL();
  } catch (const DivergenceError& e) {
    EXPECT_EQ(e.epoch(), 1u);
  }
}

TEST(Train, RejectsShuffleAndBadConfig) {
  Model m(ModelSpec::stack(1, CellKind::dense, 1, 2), 1);
  TrainConfig c;
  c.shuffle = true;
  EXPECT_THROW(train(m, linear_windows(5), c), ConfigError);
  c.shuffle = false;
  c.beta1 = 1.0;
  EXPECT_THROW(train(m, linear_windows(5), c), ConfigError);
}

TEST(Train, DeterministicAndBatchOrdered) {
  const Dataset raw = physics_table(60, 5);
  const WindowBatch w = make_windows(normalize(raw, fit_stats(raw)), 5);
  TrainConfig c;
  c.epochs = 15;
  c.batch_size = 16;
  Model a(ModelSpec::stack(5, CellKind::lstm, 2, 4), 9);
  Model b(ModelSpec::stack(5, CellKind::lstm, 2, 4), 9);
  const TrainHistory ha = train(a, w, c, nullptr, &w);
  const TrainHistory hb = train(b, w, c, nullptr, &w);
  EXPECT_EQ(snapshot(a), snapshot(b));
  ASSERT_EQ(ha.epochs.size(), 15u);
  for (std::size_t i = 0; i < 15; ++i) {
    EXPECT_EQ(ha.epochs[i].train_objective, hb.epochs[i].train_objective);
    ASSERT_TRUE(ha.epochs[i].val_mse.has_value());
  }
  EXPECT_EQ(*ha.epochs.back().val_mse, evaluate(a, w).mse);
}

TEST(Train, ZeroAlphaPhysicsIsPlainTraining) {
  const Dataset raw = physics_table(50, 6);
  const NormStats st = fit_stats(raw);
  const WindowBatch w = make_windows(normalize(raw, st), 4);
  PhysicsData pd{physics_cfg(0.0, true), make_physics_targets(raw, w, asm1::InputMap{})};
  pd.config.target_range = st.target;
  TrainConfig c;
  c.epochs = 20;
  Model a(ModelSpec::stack(5, CellKind::simple_rnn, 2, 4), 4);
  Model b(ModelSpec::stack(5, CellKind::simple_rnn, 2, 4), 4);
  train(a, w, c);
  train(b, w, c, &pd);
  EXPECT_EQ(snapshot(a), snapshot(b));

  pd.config.alpha = 1e-3;
  Model p(ModelSpec::stack(5, CellKind::simple_rnn, 2, 4), 4);
  const TrainHistory hp = train(p, w, c, &pd);
  EXPECT_GT(hp.epochs[0].train_objective, hp.epochs[0].train_mse);
  EXPECT_NE(snapshot(p), snapshot(a));
}

TEST(Train, HistoryCsv) {
  Model m(ModelSpec::stack(1, CellKind::dense, 1, 2), 1);
  TrainConfig c;
  c.epochs = 3;
  const TrainHistory h = train(m, linear_windows(8), c);
  const auto path = std::filesystem::temp_directory_path() / "pitl_history_test.csv";
  h.write_csv(path);
  std::ifstream in(path);
  std::string header, line;
  std::getline(in, header);
  EXPECT_EQ(header, "epoch,train_objective,train_mse,train_mae,val_mse,val_mae");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(line.substr(line.size() - 2), ",,");
  }
  EXPECT_EQ(rows, 3);
  std::filesystem::remove(path);
}
