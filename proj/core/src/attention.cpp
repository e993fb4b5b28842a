#include "textpix/attention.hpp"

#include <string>

#include "textpix/error.hpp"

namespace textpix {

namespace {

void expect_vector(Var v, std::size_t width, const char* what) {
  if (v.value().shape() != Shape{width}) {
    throw ShapeError(std::string("attention: ") + what + " has shape " +
                     shape_to_string(v.value().shape()) + ", expected [" +
                     std::to_string(width) + "]");
  }
}

}  // namespace

Var align_score(Var h_pix_prev, Var h_lang, const AdditiveAlignWeights& w) {
  const Shape& wp = w.w_pix.value().shape();
  const Shape& wl = w.w_lang.value().shape();
  if (wp.size() != 2 || wl.size() != 2) throw ShapeError("align_score: weights must be matrices");
  expect_vector(h_pix_prev, wp[1], "decoder state");
  expect_vector(h_lang, wl[0], "annotation");
  if (wl[1] != wp[0]) throw ShapeError("align_score: hidden widths of W_pix and W_lang differ");
  expect_vector(w.bias, wp[0], "alignment bias");
  expect_vector(w.v, wp[0], "alignment readout");
  Var hidden = tanh_op(add(add(matvec(w.w_pix, h_pix_prev), vecmat(h_lang, w.w_lang)), w.bias));
  return sum(mul(w.v, hidden));
}

Var align_score_general(Var h_pix_prev, Var h_lang, Var w_general) {
  const Shape& wg = w_general.value().shape();
  if (wg.size() != 2) throw ShapeError("align_score_general: weight must be a matrix");
  expect_vector(h_pix_prev, wg[1], "decoder state");
  expect_vector(h_lang, wg[0], "annotation");
  return sum(mul(h_lang, matvec(w_general, h_pix_prev)));
}

Var attention_weights(Var scores) {
  const Tensor& s = scores.value();
  if (s.rank() != 1) throw ShapeError("attention_weights: scores must be a vector");
  return softmax(scores);
}

Var context_vector(Var weights, Var annotations) {
  const Tensor& w = weights.value();
  const Tensor& a = annotations.value();
  if (w.rank() != 1 || a.rank() != 2 || w.size() != a.shape()[0]) {
    throw ShapeError("context_vector: " + std::to_string(w.size()) + " weights for annotations " +
                     shape_to_string(a.shape()));
  }
  return vecmat(weights, annotations);
}

AttentionMemory prepare_attention(Var annotations, const BoundModel& model) {
  const auto& d = model.dims();
  const Tensor& a = annotations.value();
  if (a.rank() != 2 || a.shape()[1] != d.annotation_width()) {
    throw ShapeError("prepare_attention: annotations " + shape_to_string(a.shape()) +
                     " do not have width " + std::to_string(d.annotation_width()));
  }
  AttentionMemory memory{annotations, {}};
  if (d.attention == AttentionKind::additive) {
    memory.projected = matmul(annotations, model[model.layout().align_lang]);
  }
  return memory;
}

AttentionMemory prepare_attention(const Annotations& annotations, const BoundModel& model) {
  return prepare_attention(annotations.rows, model);
}

AttentionResult attend(Var query, const AttentionMemory& memory, const BoundModel& model) {
  const auto& d = model.dims();
  const auto& l = model.layout();
  expect_vector(query, d.decoder_width, "query");
  Var scores;
  if (d.attention == AttentionKind::additive) {
    Var q = add(matvec(model[l.align_pix], query), model[l.align_bias]);
    Var hidden = tanh_op(add_row_broadcast(memory.projected, q));
    scores = matvec(hidden, model[l.align_v]);
  } else {
    scores = matvec(memory.annotations, matvec(model[l.align_general], query));
  }
  Var weights = attention_weights(scores);
  return {scores, weights, context_vector(weights, memory.annotations)};
}

}  // namespace textpix
