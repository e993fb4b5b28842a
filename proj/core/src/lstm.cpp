#include "textpix/lstm.hpp"

#include <string>

#include "textpix/error.hpp"

namespace textpix {

LstmState zero_lstm_state(Tape& tape, std::size_t width) {
  return {tape.constant(Tensor({width})), tape.constant(Tensor({width}))};
}

LstmState lstm_step(Var x, const LstmState& prev, const LstmWeights& weights) {
  const Tensor& w_is = weights.w_is.value();
  const Tensor& w_ss = weights.w_ss.value();
  if (w_is.rank() != 2 || w_ss.rank() != 2) throw ShapeError("lstm_step: weights must be matrices");
  const std::size_t width = w_ss.shape()[1];
  if (w_ss.shape()[0] != 4 * width || w_is.shape()[0] != 4 * width) {
    throw ShapeError("lstm_step: weights " + shape_to_string(w_is.shape()) + " / " +
                     shape_to_string(w_ss.shape()) + " are not 4x the cell width");
  }
  if (weights.bias.value().shape() != Shape{4 * width}) {
    throw ShapeError("lstm_step: bias must have shape [" + std::to_string(4 * width) + "]");
  }
  if (x.value().shape() != Shape{w_is.shape()[1]}) {
    throw ShapeError("lstm_step: input " + shape_to_string(x.value().shape()) +
                     " does not match input weights " + shape_to_string(w_is.shape()));
  }
  if (prev.h.value().shape() != Shape{width} || prev.c.value().shape() != Shape{width}) {
    throw ShapeError("lstm_step: previous state width does not match cell width " +
                     std::to_string(width));
  }

  Var pre = add(add(matvec(weights.w_is, x), matvec(weights.w_ss, prev.h)), weights.bias);
  auto block = [&](LstmGate gate) {
    return slice(pre, static_cast<std::size_t>(gate) * width, width);
  };
  Var o = sigmoid(block(LstmGate::output));
  Var f = sigmoid(block(LstmGate::forget));
  Var i = sigmoid(block(LstmGate::input));
  Var g = tanh_op(block(LstmGate::content));
  Var c = add(mul(f, prev.c), mul(i, g));
  Var h = mul(o, tanh_op(c));
  return {h, c};
}

}  // namespace textpix
