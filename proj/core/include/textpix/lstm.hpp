#pragma once

#include <cstddef>

#include "textpix/autodiff.hpp"

namespace textpix {

struct LstmState {
  Var h;
  Var c;
};

// Gate pre-activations are laid out as [o | f | i | g], each block `width` wide, in
// both weight matrices and the bias.
struct LstmWeights {
  Var w_is;  // [4w x input]
  Var w_ss;  // [4w x w]
  Var bias;  // [4w]
};

enum class LstmGate : std::size_t { output = 0, forget = 1, input = 2, content = 3 };

LstmState zero_lstm_state(Tape& tape, std::size_t width);

// One cell update: o, f, i = sigmoid(...), g = tanh(...), c' = f*c + i*g, h' = o*tanh(c').
LstmState lstm_step(Var x, const LstmState& prev, const LstmWeights& weights);

}  // namespace textpix
