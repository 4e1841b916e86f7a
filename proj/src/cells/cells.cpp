#include "pitl/cells/cells.hpp"

namespace pitl {

Var apply_activation(Var x, Activation act) {
  switch (act) {
    case Activation::tanh: return ad::tanh(x);
    case Activation::sigmoid: return ad::sigmoid(x);
    case Activation::identity: return ad::identity(x);
  }
  return x;
}

Var dense_forward(Var x, Var w, Var b, Activation act) {
  return apply_activation(ad::add_bias(ad::matmul(x, w), b), act);
}

namespace {

// x W + h U + b
Var affine2(Var x, Var w, Var h, Var u, Var b) {
  return ad::add_bias(ad::add(ad::matmul(x, w), ad::matmul(h, u)), b);
}

}  // namespace

Var rnn_step(Var x, Var h_prev, const RnnVars& p) {
  return ad::tanh(affine2(x, p.w, h_prev, p.u, p.b));
}

LstmStep lstm_step(Var x, Var h_prev, Var c_prev, const LstmVars& p) {
  LstmStep s;
  s.input_gate = ad::sigmoid(affine2(x, p.w_i, h_prev, p.u_i, p.b_i));
  s.forget_gate = ad::sigmoid(affine2(x, p.w_f, h_prev, p.u_f, p.b_f));
  s.output_gate = ad::sigmoid(affine2(x, p.w_o, h_prev, p.u_o, p.b_o));
  s.candidate = ad::tanh(affine2(x, p.w_c, h_prev, p.u_c, p.b_c));
  s.c = ad::add(ad::mul(s.forget_gate, c_prev), ad::mul(s.input_gate, s.candidate));
  s.h = ad::mul(s.output_gate, ad::tanh(s.c));
  return s;
}

GruStep gru_step(Var x, Var h_prev, const GruVars& p) {
  GruStep s;
  s.update_gate = ad::sigmoid(affine2(x, p.w_z, h_prev, p.u_z, p.b_z));
  s.reset_gate = ad::sigmoid(affine2(x, p.w_r, h_prev, p.u_r, p.b_r));
  s.candidate = ad::tanh(affine2(x, p.w_h, ad::mul(s.reset_gate, h_prev), p.u_h, p.b_h));
  const Var keep = ad::add_scalar(ad::scale(s.update_gate, -1.0), 1.0);
  s.h = ad::add(ad::mul(keep, h_prev), ad::mul(s.update_gate, s.candidate));
  return s;
}

}  // namespace pitl
