#include "textpix/encoder.hpp"

#include <string>
#include <vector>

#include "textpix/error.hpp"

namespace textpix {

Annotations encode_words(Tape& tape, const Caption& caption, Var embedding,
                         const LstmWeights& forward, const LstmWeights& backward) {
  const std::size_t n = caption.length();
  if (n == 0) throw ValueError("encode_caption: empty caption");
  const std::size_t vocab = embedding.value().shape()[0];
  std::vector<Var> embedded;
  embedded.reserve(n);
  for (TokenId id : caption.ids) {
    if (id >= vocab) {
      throw ValueError("encode_caption: token id " + std::to_string(id) +
                       " outside embedding table of " + std::to_string(vocab) + " rows");
    }
    embedded.push_back(embed_lookup(embedding, id));
  }

  const std::size_t fw = forward.w_ss.value().shape()[1];
  const std::size_t bw = backward.w_ss.value().shape()[1];
  std::vector<Var> fwd(n), bwd(n);
  LstmState state = zero_lstm_state(tape, fw);
  for (std::size_t i = 0; i < n; ++i) {
    state = lstm_step(embedded[i], state, forward);
    fwd[i] = state.h;
  }
  state = zero_lstm_state(tape, bw);
  for (std::size_t i = n; i-- > 0;) {
    state = lstm_step(embedded[i], state, backward);
    bwd[i] = state.h;
  }

  std::vector<Var> rows;
  rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) rows.push_back(concat(fwd[i], bwd[i]));
  return {stack_rows(rows)};
}

Annotations encode_caption(const Caption& caption, const BoundModel& model) {
  const auto& layout = model.layout();
  return encode_words(*model.vars.front().tape, caption, model[layout.word_embedding],
                      model.lstm(layout.encoder_forward), model.lstm(layout.encoder_backward));
}

}  // namespace textpix
