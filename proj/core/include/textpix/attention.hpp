#pragma once

#include "textpix/autodiff.hpp"
#include "textpix/encoder.hpp"
#include "textpix/params.hpp"

namespace textpix {

struct AttentionResult {
  Var scores;   // [N] alignment scores
  Var weights;  // [N] softmax of the scores
  Var context;  // [2m] weighted sum of annotation rows
};

struct AdditiveAlignWeights {
  Var w_pix;   // [a x H]
  Var w_lang;  // [2m x a]
  Var bias;    // [a]
  Var v;       // [a]
};

// v . tanh(W_pix h_pix + W_lang^T h_lang + b) for one annotation row.
Var align_score(Var h_pix_prev, Var h_lang, const AdditiveAlignWeights& w);
// Bilinear score h_lang . (W_general h_pix).
Var align_score_general(Var h_pix_prev, Var h_lang, Var w_general);

Var attention_weights(Var scores);
Var context_vector(Var weights, Var annotations);

// Query-independent part of the alignment network, computed once per caption.
struct AttentionMemory {
  Var annotations;  // [N x 2m]
  Var projected;    // [N x a] = annotations * W_lang (additive only)
};

AttentionMemory prepare_attention(const Annotations& annotations, const BoundModel& model);
AttentionMemory prepare_attention(Var annotations, const BoundModel& model);

// Scores every annotation against `query` (the previous decoder state) and returns the
// normalized weights and the context vector.
AttentionResult attend(Var query, const AttentionMemory& memory, const BoundModel& model);

}  // namespace textpix
