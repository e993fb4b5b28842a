#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "textpix/autodiff.hpp"
#include "textpix/lstm.hpp"
#include "textpix/tensor.hpp"

namespace textpix {

// Ordered collection of named tensors. Used for model parameters, their gradients and
// optimizer accumulators, which always share names and shapes position by position.
class ParamSet {
 public:
  std::size_t add(std::string name, Tensor value);

  std::size_t size() const { return tensors_.size(); }
  Tensor& operator[](std::size_t i) { return tensors_[i]; }
  const Tensor& operator[](std::size_t i) const { return tensors_[i]; }
  const std::string& name(std::size_t i) const { return names_[i]; }
  std::optional<std::size_t> find(std::string_view name) const;

  std::size_t scalar_count() const;
  ParamSet zeros_like() const;
  bool same_layout(const ParamSet& other) const;

  friend bool operator==(const ParamSet&, const ParamSet&) = default;

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> tensors_;
};

enum class AttentionKind : std::uint8_t {
  additive,  // v . tanh(W_pix h + W_lang^T a + b)
  general,   // a . (W_general h), the bilinear form
};

std::string_view to_string(AttentionKind kind);
AttentionKind attention_kind_from_string(std::string_view text);

struct ModelDims {
  std::size_t vocab_size = 4;
  std::size_t embed_dim = 32;       // word and pixel embeddings
  std::size_t encoder_width = 32;   // m; annotations are 2m wide
  std::size_t decoder_width = 64;
  std::size_t align_width = 32;
  std::size_t decoder_layers = 1;
  std::size_t levels = 16;          // Q
  std::size_t height = 12;
  std::size_t width = 12;
  AttentionKind attention = AttentionKind::additive;

  std::size_t pixels() const { return height * width; }
  std::size_t annotation_width() const { return 2 * encoder_width; }
  std::size_t bos_row() const { return levels; }
  void validate() const;

  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

struct LstmIndices {
  std::size_t w_is = 0, w_ss = 0, bias = 0;
};

// Position of every tensor inside ModelParams::tensors.
struct ParamLayout {
  std::size_t word_embedding = 0;
  LstmIndices encoder_forward;
  LstmIndices encoder_backward;
  std::size_t pixel_embedding = 0;
  std::vector<LstmIndices> decoder;
  std::size_t align_pix = 0, align_lang = 0, align_bias = 0, align_v = 0;  // additive
  std::size_t align_general = 0;                                          // general
  std::size_t out_w = 0, out_b = 0;
};

struct ModelParams {
  ModelDims dims;
  ParamSet tensors;
  ParamLayout layout;

  friend bool operator==(const ModelParams& a, const ModelParams& b) {
    return a.dims == b.dims && a.tensors == b.tensors;
  }
};

// All tensors zero: the decoder then emits a uniform distribution at every step.
ModelParams zero_model(const ModelDims& dims);
// Uniform in [-s, s], s = 1/sqrt(fan_in) per tensor, from a fixed seed.
ModelParams init_model(const ModelDims& dims, std::uint64_t seed);
// Rebuilds the layout for tensors loaded from disk; names and shapes must match `dims`.
ModelParams assemble_model(const ModelDims& dims, ParamSet tensors);

// Parameters registered as leaves of one tape.
struct BoundModel {
  const ModelParams* params = nullptr;
  std::vector<Var> vars;

  const ModelDims& dims() const { return params->dims; }
  const ParamLayout& layout() const { return params->layout; }
  Var operator[](std::size_t i) const { return vars[i]; }
  LstmWeights lstm(const LstmIndices& idx) const { return {vars[idx.w_is], vars[idx.w_ss], vars[idx.bias]}; }
};

std::vector<Var> bind_params(Tape& tape, const ParamSet& params, bool requires_grad = true);
BoundModel bind_model(Tape& tape, const ModelParams& params, bool requires_grad = true);

// Copies the gradient of each bound leaf into a ParamSet with the same layout.
ParamSet collect_gradients(const Tape& tape, const std::vector<Var>& vars, const ParamSet& like);

}  // namespace textpix
