#pragma once

#include "pitl/cells/layer_spec.hpp"
#include "pitl/numgrad/tape.hpp"

// Single-step cell equations on the tape. Inputs are batch-major: x is
// B x in, states are B x width, input weights in x width, recurrent weights
// width x width, biases 1 x width.
namespace pitl {

Var apply_activation(Var x, Activation act);

/// act(x W + b)
Var dense_forward(Var x, Var w, Var b, Activation act);

struct RnnVars {
  Var w, u, b;
};

/// h_t = tanh(x W + h_prev U + b)
Var rnn_step(Var x, Var h_prev, const RnnVars& p);

struct LstmVars {
  Var w_i, w_f, w_o, w_c;
  Var u_i, u_f, u_o, u_c;
  Var b_i, b_f, b_o, b_c;
};

struct LstmStep {
  Var h, c;
  Var input_gate, forget_gate, output_gate, candidate;
};

LstmStep lstm_step(Var x, Var h_prev, Var c_prev, const LstmVars& p);

struct GruVars {
  Var w_z, w_r, w_h;
  Var u_z, u_r, u_h;
  Var b_z, b_r, b_h;
};

struct GruStep {
  Var h;
  Var update_gate, reset_gate, candidate;
};

/// h_t = (1 - z) * h_prev + z * h~ with h~ = tanh(x W_h + (r * h_prev) U_h + b_h)
GruStep gru_step(Var x, Var h_prev, const GruVars& p);

}  // namespace pitl
