#include "pitl/numgrad/tape.hpp"

#include <cmath>

#include "pitl/errors.hpp"
#include "pitl/numgrad/kernels.hpp"

namespace pitl {

Var Tape::constant(Tensor2D value) {
  nodes_.push_back(Node{std::move(value), {}, {}, nullptr, false});
  return Var(this, nodes_.size() - 1);
}

Var Tape::param(Param& p) {
  if (skip_frozen_ && p.frozen) return constant(p.value);
  nodes_.push_back(Node{p.value, {}, {}, &p, true});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor2D value, std::initializer_list<std::size_t> parents, Backward backward) {
  bool needs = false;
  for (std::size_t id : parents) needs = needs || nodes_[id].requires_grad;
  nodes_.push_back(Node{std::move(value), {}, needs ? std::move(backward) : Backward{}, nullptr, needs});
  return Var(this, nodes_.size() - 1);
}

Tensor2D& Tape::grad(std::size_t id) {
  Node& n = nodes_[id];
  if (!n.grad.same_shape(n.value)) n.grad = Tensor2D(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::backward(Var root) {
  if (swept_) throw StateError("backward called twice on the same tape; run a new forward pass");
  if (&root.tape() != this) throw StateError("backward root belongs to another tape");
  const Tensor2D& rv = nodes_[root.id()].value;
  if (rv.rows() != 1 || rv.cols() != 1) {
    throw DimensionError("backward root must be 1x1, got " + rv.shape_str());
  }
  swept_ = true;
  sweep_order_.clear();
  grad(root.id())(0, 0) = 1.0;
  for (std::size_t id = root.id() + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.requires_grad || n.grad.empty()) continue;
    if (n.backward) {
      sweep_order_.push_back(id);
      n.backward(*this, id);
    }
  }
  for (Node& n : nodes_) {
    if (n.param == nullptr) continue;
    Param& p = *n.param;
    if (!p.grad.same_shape(p.value)) p.grad = Tensor2D(p.value.rows(), p.value.cols());
    if (!n.grad.empty()) {
      for (std::size_t i = 0; i < p.grad.size(); ++i) p.grad[i] += n.grad[i];
    }
    p.grad_ready = true;
  }
}

void Tape::clear() {
  nodes_.clear();
  sweep_order_.clear();
  swept_ = false;
}

namespace ad {

namespace {

Tape& same_tape(Var a, Var b, const char* op) {
  if (&a.tape() != &b.tape()) throw StateError(std::string(op) + ": operands on different tapes");
  return a.tape();
}

void require_same_shape(const Tensor2D& a, const Tensor2D& b, const char* op) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
  }
}

// Accumulates `g` into the gradient slot of `id` when that node wants one.
void accumulate(Tape& t, std::size_t id, const Tensor2D& g) {
  if (!t.requires_grad(id)) return;
  Tensor2D& dst = t.grad(id);
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[i];
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& t = same_tape(a, b, "matmul");
  Tensor2D out;
  kernels::matmul(a.value(), b.value(), out);
  const std::size_t ia = a.id(), ib = b.id();
  return t.record(std::move(out), {ia, ib}, [ia, ib](Tape& tp, std::size_t self) {
    const Tensor2D& g = tp.grad(self);
    if (tp.requires_grad(ia)) kernels::matmul_nt_acc(g, tp.value(ib), tp.grad(ia));
    if (tp.requires_grad(ib)) kernels::matmul_tn_acc(tp.value(ia), g, tp.grad(ib));
  });
}

Var add(Var a, Var b) {
  Tape& t = same_tape(a, b, "add");
  require_same_shape(a.value(), b.value(), "add");
  Tensor2D out = a.value();
  const Tensor2D& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  const std::size_t ia = a.id(), ib = b.id();
  return t.record(std::move(out), {ia, ib}, [ia, ib](Tape& tp, std::size_t self) {
    const Tensor2D& g = tp.grad(self);
    accumulate(tp, ia, g);
    accumulate(tp, ib, g);
  });
}

Var sub(Var a, Var b) {
  Tape& t = same_tape(a, b, "sub");
  require_same_shape(a.value(), b.value(), "sub");
  Tensor2D out = a.value();
  const Tensor2D& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  const std::size_t ia = a.id(), ib = b.id();
  return t.record(std::move(out), {ia, ib}, [ia, ib](Tape& tp, std::size_t self) {
    const Tensor2D& g = tp.grad(self);
    accumulate(tp, ia, g);
    if (tp.requires_grad(ib)) {
      Tensor2D& gb = tp.grad(ib);
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] -= g[i];
    }
  });
}

Var mul(Var a, Var b) {
  Tape& t = same_tape(a, b, "mul");
  require_same_shape(a.value(), b.value(), "mul");
  Tensor2D out = a.value();
  const Tensor2D& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  const std::size_t ia = a.id(), ib = b.id();
  return t.record(std::move(out), {ia, ib}, [ia, ib](Tape& tp, std::size_t self) {
    const Tensor2D& g = tp.grad(self);
    const Tensor2D& av = tp.value(ia);
    const Tensor2D& bv = tp.value(ib);
    if (tp.requires_grad(ia)) {
      Tensor2D& ga = tp.grad(ia);
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] * bv[i];
    }
    if (tp.requires_grad(ib)) {
      Tensor2D& gb = tp.grad(ib);
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g[i] * av[i];
    }
  });
}

Var div(Var a, Var b) {
  Tape& t = same_tape(a, b, "div");
  require_same_shape(a.value(), b.value(), "div");
  Tensor2D out = a.value();
  const Tensor2D& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] /= bv[i];
  const std::size_t ia = a.id(), ib = b.id();
  return t.record(std::move(out), {ia, ib}, [ia, ib](Tape& tp, std::size_t self) {
    const Tensor2D& g = tp.grad(self);
    const Tensor2D& av = tp.value(ia);
    const Tensor2D& bv = tp.value(ib);
    if (tp.requires_grad(ia)) {
      Tensor2D& ga = tp.grad(ia);
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] / bv[i];
    }
    if (tp.requires_grad(ib)) {
      Tensor2D& gb = tp.grad(ib);
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] -= g[i] * av[i] / (bv[i] * bv[i]);
    }
  });
}

Var add_bias(Var x, Var bias) {
  Tape& t = same_tape(x, bias, "add_bias");
  const Tensor2D& xv = x.value();
  const Tensor2D& bv = bias.value();
  if (bv.rows() != 1 || bv.cols() != xv.cols()) {
    throw DimensionError("add_bias: bias " + bv.shape_str() + " does not fit " + xv.shape_str());
  }
  Tensor2D out = xv;
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += bv(0, c);
  const std::size_t ix = x.id(), ib = bias.id();
  return t.record(std::move(out), {ix, ib}, [ix, ib](Tape& tp, std::size_t self) {
    const Tensor2D& g = tp.grad(self);
    accumulate(tp, ix, g);
    if (tp.requires_grad(ib)) {
      Tensor2D& gb = tp.grad(ib);
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < g.cols(); ++c) gb(0, c) += g(r, c);
    }
  });
}

Var scale(Var x, double s) {
  Tensor2D out = x.value();
  for (double& v : out.data()) v *= s;
  const std::size_t ix = x.id();
  return x.tape().record(std::move(out), {ix}, [ix, s](Tape& tp, std::size_t self) {
    const Tensor2D& g = tp.grad(self);
    Tensor2D& gx = tp.grad(ix);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += s * g[i];
  });
}

Var add_scalar(Var x, double s) {
  Tensor2D out = x.value();
  for (double& v : out.data()) v += s;
  const std::size_t ix = x.id();
  return x.tape().record(std::move(out), {ix}, [ix](Tape& tp, std::size_t self) {
    accumulate(tp, ix, tp.grad(self));
  });
}

Var sigmoid(Var x) {
  Tensor2D out;
  kernels::apply(kernels::Unary::sigmoid, x.value(), out);
  const std::size_t ix = x.id();
  return x.tape().record(std::move(out), {ix}, [ix](Tape& tp, std::size_t self) {
    const Tensor2D& g = tp.grad(self);
    const Tensor2D& y = tp.value(self);
    Tensor2D& gx = tp.grad(ix);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[i] * y[i] * (1.0 - y[i]);
  });
}

Var tanh(Var x) {
  Tensor2D out;
  kernels::apply(kernels::Unary::tanh, x.value(), out);
  const std::size_t ix = x.id();
  return x.tape().record(std::move(out), {ix}, [ix](Tape& tp, std::size_t self) {
    const Tensor2D& g = tp.grad(self);
    const Tensor2D& y = tp.value(self);
    Tensor2D& gx = tp.grad(ix);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[i] * (1.0 - y[i] * y[i]);
  });
}

Var square(Var x) {
  Tensor2D out = x.value();
  for (double& v : out.data()) v *= v;
  const std::size_t ix = x.id();
  return x.tape().record(std::move(out), {ix}, [ix](Tape& tp, std::size_t self) {
    const Tensor2D& g = tp.grad(self);
    const Tensor2D& xv = tp.value(ix);
    Tensor2D& gx = tp.grad(ix);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += 2.0 * xv[i] * g[i];
  });
}

Var clamp_min(Var x, double lo) {
  Tensor2D out = x.value();
  for (double& v : out.data()) v = v > lo ? v : lo;
  const std::size_t ix = x.id();
  return x.tape().record(std::move(out), {ix}, [ix, lo](Tape& tp, std::size_t self) {
    const Tensor2D& g = tp.grad(self);
    const Tensor2D& xv = tp.value(ix);
    Tensor2D& gx = tp.grad(ix);
    for (std::size_t i = 0; i < gx.size(); ++i)
      if (xv[i] > lo) gx[i] += g[i];
  });
}

Var slice_rows(Var x, std::size_t begin, std::size_t end) {
  const Tensor2D& xv = x.value();
  if (begin > end || end > xv.rows()) {
    throw DimensionError("slice_rows: [" + std::to_string(begin) + ", " + std::to_string(end) +
                         ") out of " + xv.shape_str());
  }
  const std::size_t cols = xv.cols();
  std::vector<double> v(xv.data().begin() + begin * cols, xv.data().begin() + end * cols);
  const std::size_t ix = x.id();
  return x.tape().record(Tensor2D(end - begin, cols, std::move(v)), {ix},
                         [ix, begin, cols](Tape& tp, std::size_t self) {
                           const Tensor2D& g = tp.grad(self);
                           Tensor2D& gx = tp.grad(ix);
                           for (std::size_t i = 0; i < g.size(); ++i) gx[begin * cols + i] += g[i];
                         });
}

Var sum(Var x) {
  const std::size_t ix = x.id();
  return x.tape().record(Tensor2D::scalar(x.value().sum()), {ix}, [ix](Tape& tp, std::size_t self) {
    const double g = tp.grad(self)(0, 0);
    Tensor2D& gx = tp.grad(ix);
    for (double& v : gx.data()) v += g;
  });
}

Var mean(Var x) {
  const double n = static_cast<double>(x.value().size());
  if (n == 0) throw DimensionError("mean of an empty tensor");
  const std::size_t ix = x.id();
  return x.tape().record(Tensor2D::scalar(x.value().sum() / n), {ix}, [ix, n](Tape& tp, std::size_t self) {
    const double g = tp.grad(self)(0, 0) / n;
    Tensor2D& gx = tp.grad(ix);
    for (double& v : gx.data()) v += g;
  });
}

}  // namespace ad

}  // namespace pitl
