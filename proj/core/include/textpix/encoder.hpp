#pragma once

#include <cstddef>

#include "textpix/autodiff.hpp"
#include "textpix/params.hpp"
#include "textpix/vocab.hpp"

namespace textpix {

// Per-word annotation vectors: row i is [forward h_i, backward h_i], 2m wide.
struct Annotations {
  Var rows;  // [N x 2m]
  std::size_t length() const { return rows.value().shape()[0]; }
  std::size_t width() const { return rows.value().shape()[1]; }
};

// Bidirectional LSTM over the caption's word embeddings, both directions starting from
// zero state. Differentiable with respect to every bound encoder parameter.
Annotations encode_caption(const Caption& caption, const BoundModel& model);

// Same computation with explicit weights; used to check direction symmetry in isolation.
Annotations encode_words(Tape& tape, const Caption& caption, Var embedding,
                         const LstmWeights& forward, const LstmWeights& backward);

}  // namespace textpix
