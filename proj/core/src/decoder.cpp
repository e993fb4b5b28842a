#include "textpix/decoder.hpp"

#include <cmath>
#include <string>

#include "textpix/encoder.hpp"
#include "textpix/error.hpp"

namespace textpix {

void check_image_for_model(const ImageGrid& image, const ModelDims& dims) {
  if (image.levels() != dims.levels) {
    throw ValueError("image has " + std::to_string(image.levels()) + " levels, model expects " +
                     std::to_string(dims.levels));
  }
  if (image.height() != dims.height || image.width() != dims.width) {
    throw ValueError("image is " + std::to_string(image.height()) + "x" +
                     std::to_string(image.width()) + ", model expects " +
                     std::to_string(dims.height) + "x" + std::to_string(dims.width));
  }
}

DecoderState initial_decoder_state(Tape& tape, const ModelDims& dims) {
  DecoderState s;
  for (std::size_t l = 0; l < dims.decoder_layers; ++l)
    s.layers.push_back(zero_lstm_state(tape, dims.decoder_width));
  return s;
}

std::vector<double> distribution(const DecoderStepOutput& step) {
  std::vector<double> p;
  for (double lp : step.log_probs.value().data()) p.push_back(std::exp(lp));
  return p;
}

DecoderStepOutput decoder_step(int prev_pixel, const DecoderState& prev,
                               const AttentionMemory& memory, const BoundModel& model) {
  const auto& d = model.dims();
  const auto& l = model.layout();
  if (prev_pixel != kBosPixel && (prev_pixel < 0 || static_cast<std::size_t>(prev_pixel) >= d.levels)) {
    throw ValueError("decoder_step: previous pixel " + std::to_string(prev_pixel) +
                     " outside [0, " + std::to_string(d.levels) + ")");
  }
  if (prev.layers.size() != d.decoder_layers) {
    throw ShapeError("decoder_step: state has " + std::to_string(prev.layers.size()) +
                     " layers, model has " + std::to_string(d.decoder_layers));
  }

  DecoderStepOutput out;
  out.attention = attend(prev.query(), memory, model);

  const std::size_t row = prev_pixel == kBosPixel ? d.bos_row() : static_cast<std::size_t>(prev_pixel);
  Var input = concat(embed_lookup(model[l.pixel_embedding], row), out.attention.context);
  out.state.layers.reserve(d.decoder_layers);
  for (std::size_t k = 0; k < d.decoder_layers; ++k) {
    LstmState next = lstm_step(input, prev.layers[k], model.lstm(l.decoder[k]));
    out.state.layers.push_back(next);
    input = next.h;
  }
  Var features = concat(out.state.query(), out.attention.context);
  out.log_probs = log_softmax(add(matvec(model[l.out_w], features), model[l.out_b]));
  return out;
}

std::vector<Var> pixel_log_probs(const ImageGrid& image, const Caption& caption,
                                 const BoundModel& model) {
  check_image_for_model(image, model.dims());
  Tape& tape = *model.vars.front().tape;
  const AttentionMemory memory = prepare_attention(encode_caption(caption, model), model);
  DecoderState state = initial_decoder_state(tape, model.dims());
  std::vector<Var> picked;
  picked.reserve(image.size());
  int prev = kBosPixel;
  for (std::size_t j = 0; j < image.size(); ++j) {
    DecoderStepOutput step = decoder_step(prev, state, memory, model);
    picked.push_back(pick(step.log_probs, image[j]));
    state = std::move(step.state);
    prev = image[j];
  }
  return picked;
}

Var log_likelihood(const ImageGrid& image, const Caption& caption, const BoundModel& model) {
  return sum_scalars(pixel_log_probs(image, caption, model));
}

double log_likelihood(const ImageGrid& image, const Caption& caption, const ModelParams& params) {
  Tape tape;
  const BoundModel model = bind_model(tape, params, false);
  return log_likelihood(image, caption, model).value()[0];
}

Var pair_nll(const TrainingPair& pair, const BoundModel& model,
             std::span<const double> level_weights) {
  std::vector<Var> terms = pixel_log_probs(pair.image, pair.caption, model);
  if (!level_weights.empty()) {
    if (level_weights.size() != model.dims().levels) {
      throw ValueError("level weights must have one entry per quantization level");
    }
    for (std::size_t j = 0; j < terms.size(); ++j) terms[j] = scale(terms[j], level_weights[pair.image[j]]);
  }
  return scale(mean_scalars(terms), -1.0);
}

Var nll_loss(std::span<const TrainingPair> batch, const BoundModel& model,
             std::span<const double> level_weights) {
  if (batch.empty()) throw ValueError("nll_loss: empty batch");
  std::vector<Var> items;
  items.reserve(batch.size());
  for (const auto& pair : batch) items.push_back(pair_nll(pair, model, level_weights));
  return mean_scalars(items);
}

double nll_loss(std::span<const TrainingPair> batch, const ModelParams& params,
                std::span<const double> level_weights) {
  Tape tape;
  const BoundModel model = bind_model(tape, params, false);
  return nll_loss(batch, model, level_weights).value()[0];
}

// ---- StepwiseDecoder --------------------------------------------------------------------

StepwiseDecoder::StepwiseDecoder(const ModelParams& params, const Caption& caption)
    : params_(&params) {
  Tape tape;
  const BoundModel model = bind_model(tape, params, false);
  const AttentionMemory memory = prepare_attention(encode_caption(caption, model), model);
  annotations_ = memory.annotations.value();
  if (memory.projected.valid()) projected_ = memory.projected.value();
}

StepwiseDecoder::State StepwiseDecoder::initial() const {
  State s;
  for (std::size_t l = 0; l < params_->dims.decoder_layers; ++l) {
    s.h.emplace_back(Shape{params_->dims.decoder_width});
    s.c.emplace_back(Shape{params_->dims.decoder_width});
  }
  return s;
}

StepwiseDecoder::Step StepwiseDecoder::step(int prev_pixel, const State& state) const {
  Tape tape;
  const BoundModel model = bind_model(tape, *params_, false);
  AttentionMemory memory{tape.constant(annotations_), {}};
  if (params_->dims.attention == AttentionKind::additive) memory.projected = tape.constant(projected_);
  DecoderState prev;
  for (std::size_t l = 0; l < state.h.size(); ++l)
    prev.layers.push_back({tape.constant(state.h[l]), tape.constant(state.c[l])});

  DecoderStepOutput out = decoder_step(prev_pixel, prev, memory, model);
  Step result;
  for (const auto& layer : out.state.layers) {
    result.state.h.push_back(layer.h.value());
    result.state.c.push_back(layer.c.value());
  }
  const auto lp = out.log_probs.value().data();
  result.log_probs.assign(lp.begin(), lp.end());
  const auto w = out.attention.weights.value().data();
  result.attention.assign(w.begin(), w.end());
  return result;
}

}  // namespace textpix
