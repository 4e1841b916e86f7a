#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pitl/cells/cells.hpp"
#include "pitl/cells/model.hpp"
#include "pitl/cells/serialize.hpp"
#include "pitl/errors.hpp"
#include "pitl/numgrad/grad_check.hpp"
#include "test_util.hpp"

using namespace pitl;
using pitl::testing::random_size;
using pitl::testing::random_tensor;
using pitl::testing::sigmoid;

namespace {

Var s(Tape& t, double v) { return t.constant(Tensor2D::scalar(v)); }

LstmVars scalar_lstm(Tape& t, double w, double b) {
  return {s(t, w), s(t, w), s(t, w), s(t, w), s(t, w), s(t, w), s(t, w), s(t, w), s(t, b), s(t, b), s(t, b), s(t, b)};
}

GruVars scalar_gru(Tape& t, double w, double b) {
  return {s(t, w), s(t, w), s(t, w), s(t, w), s(t, w), s(t, w), s(t, b), s(t, b), s(t, b)};
}

void set_all(Model& m, double v) {
  for (Param* p : m.parameters()) p->value.fill(v);
}

}  // namespace

TEST(Dense, Examples) {
  Tape t;
  const Var x = t.constant(Tensor2D::from_rows({{0.3, -0.7}}));
  EXPECT_EQ(dense_forward(x, t.constant(Tensor2D::identity(2)), t.constant(Tensor2D(1, 2)), Activation::identity).value(),
            x.value());
  EXPECT_EQ(dense_forward(x, t.constant(Tensor2D(2, 3)), t.constant(Tensor2D(1, 3)), Activation::tanh).value(),
            Tensor2D(1, 3));
  EXPECT_NEAR(dense_forward(s(t, 0.5), s(t, 2.0), s(t, 1.0), Activation::tanh).value()[0], std::tanh(2.0), 1e-12);
  EXPECT_THROW(dense_forward(x, t.constant(Tensor2D(3, 3)), t.constant(Tensor2D(1, 3)), Activation::tanh), DimensionError);
}

TEST(Rnn, Examples) {
  Tape t;
  EXPECT_EQ(rnn_step(s(t, 0.8), s(t, 0.0), {s(t, 0), s(t, 0), s(t, 0)}).value()[0], 0.0);
  EXPECT_EQ(rnn_step(s(t, 0.8), s(t, 0.0), {s(t, 0), s(t, 0.05), s(t, 0)}).value()[0], 0.0);
  EXPECT_NEAR(rnn_step(s(t, 1.0), s(t, 0.0), {s(t, 0.1), s(t, 0.1), s(t, 0.1)}).value()[0], std::tanh(0.2), 1e-12);
}

TEST(Lstm, Examples) {
  Tape t;
  const LstmStep zero = lstm_step(s(t, 0.4), s(t, 0.0), s(t, 0.0), scalar_lstm(t, 0.0, 0.0));
  for (const Var& g : {zero.input_gate, zero.forget_gate, zero.output_gate}) EXPECT_EQ(g.value()[0], 0.5);
  EXPECT_EQ(zero.c.value()[0], 0.0);
  EXPECT_EQ(zero.h.value()[0], 0.0);
  EXPECT_EQ(lstm_step(s(t, 0.4), s(t, 0.0), s(t, 0.9), scalar_lstm(t, 0.0, 0.0)).c.value()[0], 0.45);

  // Weights 0.1, biases 0.
  const double expect = sigmoid(0.1) * std::tanh(sigmoid(0.1) * std::tanh(0.1));
  EXPECT_NEAR(lstm_step(s(t, 1.0), s(t, 0.0), s(t, 0.0), scalar_lstm(t, 0.1, 0.0)).h.value()[0], expect, 1e-12);
  // Biases 0.1 as well.
  const double with_bias = sigmoid(0.2) * std::tanh(sigmoid(0.2) * std::tanh(0.2));
  EXPECT_NEAR(lstm_step(s(t, 1.0), s(t, 0.0), s(t, 0.0), scalar_lstm(t, 0.1, 0.1)).h.value()[0], with_bias, 1e-12);
}

TEST(Gru, Examples) {
  Tape t;
  EXPECT_EQ(gru_step(s(t, 0.3), s(t, 0.6), scalar_gru(t, 0.0, 0.0)).h.value()[0], 0.3);
  EXPECT_EQ(gru_step(s(t, 0.3), s(t, 0.0), scalar_gru(t, 0.0, 0.0)).h.value()[0], 0.0);
  EXPECT_NEAR(gru_step(s(t, 1.0), s(t, 0.0), scalar_gru(t, 0.1, 0.0)).h.value()[0], sigmoid(0.1) * std::tanh(0.1),
              1e-12);
  EXPECT_NEAR(gru_step(s(t, 1.0), s(t, 0.0), scalar_gru(t, 0.1, 0.1)).h.value()[0], sigmoid(0.2) * std::tanh(0.2),
              1e-12);
}

TEST(Cells, ShapeMismatch) {
  Tape t;
  const Var x = t.constant(Tensor2D(2, 3));
  const Var h = t.constant(Tensor2D(2, 4));
  EXPECT_THROW(rnn_step(x, h, {t.constant(Tensor2D(2, 4)), t.constant(Tensor2D(4, 4)), t.constant(Tensor2D(1, 4))}),
               DimensionError);
}

// Gate outputs stay in their open ranges for random parameters and inputs.
// Pre-activations are kept below ~19 in magnitude, past which tanh and the
// sigmoid round to exactly +-1 / 0 / 1 in double precision.
TEST(Cells, GateRangesProperty) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    const std::size_t b = random_size(rng, 1, 4), in = random_size(rng, 1, 5), w = random_size(rng, 1, 6);
    Tape t;
    auto r = [&](std::size_t rr, std::size_t cc) { return t.constant(random_tensor(rng, rr, cc, -1.0, 1.0)); };
    const Var x = r(b, in), h = r(b, w), c = r(b, w);
    const LstmStep ls = lstm_step(x, t.constant(random_tensor(rng, b, w, -0.999, 0.999)), c,
                                  {r(in, w), r(in, w), r(in, w), r(in, w), r(w, w), r(w, w), r(w, w), r(w, w),
                                   r(1, w), r(1, w), r(1, w), r(1, w)});
    for (const Var& g : {ls.input_gate, ls.forget_gate, ls.output_gate})
      for (double v : g.value().data()) {
        EXPECT_GT(v, 0.0);
        EXPECT_LT(v, 1.0);
      }
    for (const Var& g : {ls.h, ls.candidate})
      for (double v : g.value().data()) EXPECT_LT(std::abs(v), 1.0);

    const Var hp = t.constant(random_tensor(rng, b, w, -0.999, 0.999));
    const GruStep gs = gru_step(x, hp, {r(in, w), r(in, w), r(in, w), r(w, w), r(w, w), r(w, w), r(1, w), r(1, w), r(1, w)});
    for (const Var& g : {gs.update_gate, gs.reset_gate})
      for (double v : g.value().data()) {
        EXPECT_GT(v, 0.0);
        EXPECT_LT(v, 1.0);
      }
    for (const Var& g : {gs.h, gs.candidate})
      for (double v : g.value().data()) EXPECT_LT(std::abs(v), 1.0);
    for (double v : rnn_step(x, h, {r(in, w), r(w, w), r(1, w)}).value().data()) EXPECT_LT(std::abs(v), 1.0);
  }
}

TEST(Model, ZeroParametersGiveZeroOutput) {
  for (CellKind kind : {CellKind::dense, CellKind::simple_rnn, CellKind::lstm, CellKind::gru}) {
    Model m(ModelSpec::stack(3, kind, 2, 4), 1);
    set_all(m, 0.0);
    std::mt19937_64 rng(2);
    std::vector<Tensor2D> window;
    for (int i = 0; i < 5; ++i) window.push_back(random_tensor(rng, 2, 3, -5.0, 5.0));
    const Tensor2D y = m.predict(window);
    EXPECT_EQ(y, Tensor2D(2, 1)) << to_string(kind);
  }
}

TEST(Model, TwoLayerScalarLstmHandUnroll) {
  ModelSpec spec = ModelSpec::stack(1, CellKind::lstm, 2, 1);
  Model m(spec, 1);
  set_all(m, 0.1);
  const double x = 0.5;
  const std::size_t steps = 4;
  std::vector<Tensor2D> window(steps, Tensor2D::scalar(x));

  // Independent scalar evaluation of the stacked recurrence.
  auto step = [](double in, double h, double c, double& h_out, double& c_out) {
    const double pre = 0.1 * in + 0.1 * h + 0.1;
    const double g = sigmoid(pre);
    c_out = g * c + g * std::tanh(pre);
    h_out = g * std::tanh(c_out);
  };
  double h1 = 0, c1 = 0, h2 = 0, c2 = 0;
  for (std::size_t t = 0; t < steps; ++t) {
    double nh1, nc1, nh2, nc2;
    step(x, h1, c1, nh1, nc1);
    step(nh1, h2, c2, nh2, nc2);
    h1 = nh1, c1 = nc1, h2 = nh2, c2 = nc2;
  }
  const double expect = 0.1 * h2 + 0.1;
  EXPECT_NEAR(m.predict(window)[0], expect, 1e-12);
}

TEST(Model, WindowLengthOneIsSingleStep) {
  Model m(ModelSpec::stack(2, CellKind::gru, 1, 3), 9);
  std::mt19937_64 rng(4);
  const Tensor2D x = random_tensor(rng, 1, 2);
  Tape t;
  GruVars v;
  Layer& l = m.layers()[0];
  v = {t.constant(l.param("w_z").value), t.constant(l.param("w_r").value), t.constant(l.param("w_h").value),
       t.constant(l.param("u_z").value), t.constant(l.param("u_r").value), t.constant(l.param("u_h").value),
       t.constant(l.param("b_z").value), t.constant(l.param("b_r").value), t.constant(l.param("b_h").value)};
  const Var h = gru_step(t.constant(x), t.constant(Tensor2D(1, 3)), v).h;
  const Var y = dense_forward(h, t.constant(m.head().param("w").value), t.constant(m.head().param("b").value),
                              Activation::identity);
  std::vector<Tensor2D> window{x};
  EXPECT_EQ(m.predict(window), y.value());
}

TEST(Model, ForwardErrors) {
  Model m(ModelSpec::stack(3, CellKind::lstm, 1, 2), 1);
  std::vector<Tensor2D> empty;
  Tape t;
  EXPECT_THROW(m.forward(t, empty), DimensionError);
  std::vector<Tensor2D> wrong{Tensor2D(1, 4)};
  EXPECT_THROW(m.forward(t, wrong), DimensionError);
}

TEST(Model, DeterministicForward) {
  Model a(ModelSpec::stack(4, CellKind::lstm, 3, 8), 77);
  Model b(ModelSpec::stack(4, CellKind::lstm, 3, 8), 77);
  std::mt19937_64 rng(1);
  std::vector<Tensor2D> window;
  for (int i = 0; i < 5; ++i) window.push_back(random_tensor(rng, 6, 4));
  EXPECT_EQ(a.predict(window), b.predict(window));
  EXPECT_EQ(a.predict(window), a.predict(window));
}

TEST(Model, BiasesStartAtZero) {
  Model m(ModelSpec::stack(3, CellKind::lstm, 2, 5), 3);
  for (const Param* p : m.parameters()) {
    if (p->name.rfind("b", 0) == 0) {
      EXPECT_EQ(p->value, Tensor2D(1, p->value.cols())) << p->name;
    }
  }
}

// Window-loss gradients for every cell kind and window length 1-5.
TEST(Model, GradCheckEveryKindAndWindow) {
  for (CellKind kind : {CellKind::dense, CellKind::simple_rnn, CellKind::lstm, CellKind::gru}) {
    for (std::size_t T = 1; T <= 5; ++T) {
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        std::mt19937_64 rng(seed * 31 + T);
        Model m(ModelSpec::stack(3, kind, 2, 3), seed);
        for (Param* p : m.parameters()) p->value = random_tensor(rng, p->value.rows(), p->value.cols(), -0.8, 0.8);
        std::vector<Tensor2D> window;
        for (std::size_t i = 0; i < T; ++i) window.push_back(random_tensor(rng, 2, 3));
        const Tensor2D target = random_tensor(rng, 2, 1);
        auto f = [&](Tape& t) {
          const Var d = ad::sub(m.forward(t, window), t.constant(target));
          return ad::mean(ad::square(d));
        };
        const auto params = m.parameters();
        const auto report = grad_check(f, params, 1e-4, 1e-5);
        EXPECT_TRUE(report.passed) << to_string(kind) << " T=" << T << " seed " << seed << " err "
                                   << report.max_rel_error;
      }
    }
  }
}

TEST(Serialize, RoundTripIsExact) {
  ModelSpec spec;
  spec.input_width = 3;
  spec.layers = {{CellKind::dense, 4, Activation::identity, false},
                 {CellKind::lstm, 5, Activation::tanh, true},
                 {CellKind::gru, 2, Activation::tanh, false},
                 {CellKind::simple_rnn, 3, Activation::tanh, true}};
  Model m(spec, 12);
  std::mt19937_64 rng(6);
  for (Param* p : m.parameters()) p->value = random_tensor(rng, p->value.rows(), p->value.cols(), -1e3, 1e3);
  const Model back = model_from_json(nlohmann::json::parse(model_to_json(m).dump()));
  ASSERT_EQ(back.layers().size(), m.layers().size());
  for (std::size_t i = 0; i < m.layers().size(); ++i) {
    EXPECT_EQ(back.layers()[i].spec().kind, m.layers()[i].spec().kind);
    EXPECT_EQ(back.layers()[i].spec().frozen, m.layers()[i].spec().frozen);
    for (std::size_t k = 0; k < m.layers()[i].params().size(); ++k) {
      EXPECT_EQ(back.layers()[i].params()[k].value, m.layers()[i].params()[k].value);
      EXPECT_EQ(back.layers()[i].params()[k].frozen, m.layers()[i].params()[k].frozen);
    }
  }
  EXPECT_EQ(back.head().params()[0].value, m.head().params()[0].value);
}

TEST(Serialize, RejectsMalformed) {
  EXPECT_THROW(model_from_json(nlohmann::json::parse(R"({"format":"other"})")), ParseError);
  auto doc = model_to_json(Model(ModelSpec::stack(2, CellKind::lstm, 1, 2), 1));
  doc["layers"][0]["params"]["w_i"]["rows"] = 7;
  EXPECT_THROW(model_from_json(doc), ParseError);
}

TEST(LayerSpec, Parsing) {
  EXPECT_EQ(parse_cell_kind("simple_rnn"), CellKind::simple_rnn);
  EXPECT_EQ(parse_activation("identity"), Activation::identity);
  EXPECT_THROW(parse_cell_kind("transformer"), ConfigError);
  ModelSpec bad = ModelSpec::stack(3, CellKind::lstm, 1, 0);
  EXPECT_THROW(bad.validate(), ConfigError);
}
