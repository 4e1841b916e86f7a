#include "pitl/cells/model.hpp"

#include <array>

#include "pitl/cells/cells.hpp"
#include "pitl/errors.hpp"

namespace pitl {

namespace {

constexpr std::array<const char*, 4> kLstmGates{"i", "f", "o", "c"};
constexpr std::array<const char*, 3> kGruGates{"z", "r", "h"};

Param weight(const std::string& name, std::size_t rows, std::size_t cols, std::size_t fan_in,
             std::size_t fan_out, Rng& rng) {
  return Param(name, glorot_uniform(rows, cols, fan_in, fan_out, rng));
}

Param bias(const std::string& name, std::size_t width) { return Param(name, Tensor2D(1, width)); }

}  // namespace

Layer::Layer(LayerSpec spec, std::size_t input_width, Rng& rng) : spec_(spec), input_width_(input_width) {
  if (spec_.width == 0 || input_width_ == 0) throw ConfigError("layer widths must be >= 1");
  const std::size_t in = input_width_, w = spec_.width;
  switch (spec_.kind) {
    case CellKind::dense:
      params_.push_back(weight("w", in, w, in, w, rng));
      params_.push_back(bias("b", w));
      break;
    case CellKind::simple_rnn:
      params_.push_back(weight("w", in, w, in, w, rng));
      params_.push_back(weight("u", w, w, w, w, rng));
      params_.push_back(bias("b", w));
      break;
    case CellKind::lstm:
      for (const char* g : kLstmGates) params_.push_back(weight(std::string("w_") + g, in, w, in, w, rng));
      for (const char* g : kLstmGates) params_.push_back(weight(std::string("u_") + g, w, w, w, w, rng));
      for (const char* g : kLstmGates) params_.push_back(bias(std::string("b_") + g, w));
      break;
    case CellKind::gru:
      for (const char* g : kGruGates) params_.push_back(weight(std::string("w_") + g, in, w, in, w, rng));
      for (const char* g : kGruGates) params_.push_back(weight(std::string("u_") + g, w, w, w, w, rng));
      for (const char* g : kGruGates) params_.push_back(bias(std::string("b_") + g, w));
      break;
  }
  set_frozen(spec_.frozen);
}

Param& Layer::param(std::string_view name) {
  for (Param& p : params_)
    if (p.name == name) return p;
  throw ConfigError("layer has no parameter '" + std::string(name) + "'");
}

const Param& Layer::param(std::string_view name) const {
  return const_cast<Layer*>(this)->param(name);
}

void Layer::set_frozen(bool frozen) {
  spec_.frozen = frozen;
  for (Param& p : params_) p.frozen = frozen;
}

std::vector<Var> Layer::forward(Tape& tape, std::span<const Var> sequence) {
  std::vector<Var> out;
  out.reserve(sequence.size());
  for (const Var& x : sequence) {
    if (x.cols() != input_width_) {
      throw DimensionError("layer expects input width " + std::to_string(input_width_) + ", got " +
                           x.value().shape_str());
    }
  }
  if (sequence.empty()) return out;
  const std::size_t batch = sequence.front().rows();
  auto bind = [&](std::string_view name) { return tape.param(param(name)); };

  switch (spec_.kind) {
    case CellKind::dense: {
      const Var w = bind("w"), b = bind("b");
      for (const Var& x : sequence) out.push_back(dense_forward(x, w, b, spec_.activation));
      break;
    }
    case CellKind::simple_rnn: {
      const RnnVars p{bind("w"), bind("u"), bind("b")};
      Var h = tape.constant(Tensor2D(batch, width()));
      for (const Var& x : sequence) {
        h = rnn_step(x, h, p);
        out.push_back(h);
      }
      break;
    }
    case CellKind::lstm: {
      const LstmVars p{bind("w_i"), bind("w_f"), bind("w_o"), bind("w_c"), bind("u_i"), bind("u_f"),
                       bind("u_o"), bind("u_c"), bind("b_i"), bind("b_f"), bind("b_o"), bind("b_c")};
      Var h = tape.constant(Tensor2D(batch, width()));
      Var c = tape.constant(Tensor2D(batch, width()));
      for (const Var& x : sequence) {
        const LstmStep s = lstm_step(x, h, c, p);
        h = s.h;
        c = s.c;
        out.push_back(h);
      }
      break;
    }
    case CellKind::gru: {
      const GruVars p{bind("w_z"), bind("w_r"), bind("w_h"), bind("u_z"), bind("u_r"),
                      bind("u_h"), bind("b_z"), bind("b_r"), bind("b_h")};
      Var h = tape.constant(Tensor2D(batch, width()));
      for (const Var& x : sequence) {
        h = gru_step(x, h, p).h;
        out.push_back(h);
      }
      break;
    }
  }
  return out;
}

Model::Model(const ModelSpec& spec, std::uint64_t seed) : input_width_(spec.input_width) {
  spec.validate();
  Rng rng(seed);
  std::size_t in = spec.input_width;
  layers_.reserve(spec.layers.size());
  for (const LayerSpec& ls : spec.layers) {
    layers_.emplace_back(ls, in, rng);
    in = ls.width;
  }
  head_.emplace_back(LayerSpec{CellKind::dense, spec.output_width, Activation::identity, false}, in, rng);
}

ModelSpec Model::spec() const {
  ModelSpec s;
  s.input_width = input_width_;
  for (const Layer& l : layers_) s.layers.push_back(l.spec());
  s.output_width = head_.empty() ? 1 : head().width();
  return s;
}

std::vector<Param*> Model::parameters() {
  std::vector<Param*> out;
  for (Layer& l : layers_)
    for (Param& p : l.params()) out.push_back(&p);
  for (Layer& l : head_)
    for (Param& p : l.params()) out.push_back(&p);
  return out;
}

std::vector<const Param*> Model::parameters() const {
  std::vector<const Param*> out;
  for (const Param* p : const_cast<Model*>(this)->parameters()) out.push_back(p);
  return out;
}

void Model::unfreeze_all() {
  for (Layer& l : layers_) l.set_frozen(false);
  for (Layer& l : head_) l.set_frozen(false);
}

void Model::zero_grad() {
  for (Param* p : parameters()) p->zero_grad();
}

Var Model::forward(Tape& tape, std::span<const Tensor2D> window) {
  if (head_.empty()) throw StateError("forward on an unconstructed model");
  if (window.empty()) throw DimensionError("forward: empty window");
  std::vector<Var> seq;
  seq.reserve(window.size());
  for (const Tensor2D& x : window) {
    if (x.cols() != input_width_) {
      throw DimensionError("forward: window step has width " + std::to_string(x.cols()) + ", model expects " +
                           std::to_string(input_width_));
    }
    if (x.rows() != window.front().rows()) throw DimensionError("forward: window steps differ in batch size");
    seq.push_back(tape.constant(x));
  }
  for (Layer& l : layers_) seq = l.forward(tape, seq);
  const Var last = seq.back();
  return head().forward(tape, std::span<const Var>(&last, 1)).front();
}

Tensor2D Model::predict(std::span<const Tensor2D> window) {
  Tape tape;
  return forward(tape, window).value();
}

}  // namespace pitl
