#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "textpix/attention.hpp"
#include "textpix/autodiff.hpp"
#include "textpix/image.hpp"
#include "textpix/lstm.hpp"
#include "textpix/params.hpp"
#include "textpix/vocab.hpp"

namespace textpix {

// Previous-pixel input for the first step; selects the dedicated BOS embedding row.
inline constexpr int kBosPixel = -1;

struct DecoderState {
  std::vector<LstmState> layers;  // bottom to top
  Var query() const { return layers.back().h; }
};

DecoderState initial_decoder_state(Tape& tape, const ModelDims& dims);

struct DecoderStepOutput {
  DecoderState state;
  Var log_probs;  // [Q], log of the categorical distribution over the next pixel
  AttentionResult attention;
};

std::vector<double> distribution(const DecoderStepOutput& step);

// One autoregressive step:
//   attention query = previous top-layer hidden state
//   input           = [pixel_embedding(prev_pixel), context]
//   state           = LSTM stack update
//   log_probs       = log_softmax(W_out [h_top, context] + b_out)
DecoderStepOutput decoder_step(int prev_pixel, const DecoderState& prev,
                               const AttentionMemory& memory, const BoundModel& model);

struct TrainingPair {
  ImageGrid image;
  Caption caption;
};

// Teacher-forced pass: element j is log p(x_j | x_<j, caption) as a scalar node.
std::vector<Var> pixel_log_probs(const ImageGrid& image, const Caption& caption,
                                 const BoundModel& model);

Var log_likelihood(const ImageGrid& image, const Caption& caption, const BoundModel& model);
double log_likelihood(const ImageGrid& image, const Caption& caption, const ModelParams& params);

// -sum_j w[x_j] log p(x_j | ...) / L. Empty `level_weights` means all ones.
Var pair_nll(const TrainingPair& pair, const BoundModel& model,
             std::span<const double> level_weights = {});
// Mean of pair_nll over the batch: per-pixel NLL in nats.
Var nll_loss(std::span<const TrainingPair> batch, const BoundModel& model,
             std::span<const double> level_weights = {});
double nll_loss(std::span<const TrainingPair> batch, const ModelParams& params,
                std::span<const double> level_weights = {});

// Step-at-a-time inference from plain values. Each step runs on its own short tape, so
// memory use stays flat during generation. Values match the teacher-forced pass exactly.
class StepwiseDecoder {
 public:
  struct State {
    std::vector<Tensor> h;
    std::vector<Tensor> c;
  };
  struct Step {
    State state;
    std::vector<double> log_probs;
    std::vector<double> attention;  // [N]
  };

  StepwiseDecoder(const ModelParams& params, const Caption& caption);

  const ModelParams& params() const { return *params_; }
  std::size_t caption_length() const { return annotations_.shape()[0]; }
  State initial() const;
  Step step(int prev_pixel, const State& state) const;

 private:
  const ModelParams* params_;
  Tensor annotations_;
  Tensor projected_;
};

void check_image_for_model(const ImageGrid& image, const ModelDims& dims);

}  // namespace textpix
