#include "textpix/params.hpp"

#include <cmath>

#include "textpix/error.hpp"
#include "textpix/rng.hpp"

namespace textpix {

std::size_t ParamSet::add(std::string name, Tensor value) {
  if (find(name)) throw ValueError("duplicate parameter name '" + name + "'");
  names_.push_back(std::move(name));
  tensors_.push_back(std::move(value));
  return tensors_.size() - 1;
}

std::optional<std::size_t> ParamSet::find(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return i;
  return std::nullopt;
}

std::size_t ParamSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += t.size();
  return n;
}

ParamSet ParamSet::zeros_like() const {
  ParamSet out;
  for (std::size_t i = 0; i < size(); ++i) out.add(names_[i], Tensor::zeros_like(tensors_[i]));
  return out;
}

bool ParamSet::same_layout(const ParamSet& other) const {
  if (size() != other.size()) return false;
  for (std::size_t i = 0; i < size(); ++i)
    if (names_[i] != other.names_[i] || tensors_[i].shape() != other.tensors_[i].shape())
      return false;
  return true;
}

std::string_view to_string(AttentionKind kind) {
  return kind == AttentionKind::additive ? "additive" : "general";
}

AttentionKind attention_kind_from_string(std::string_view text) {
  if (text == "additive") return AttentionKind::additive;
  if (text == "general" || text == "luong") return AttentionKind::general;
  throw ValueError("unknown attention kind '" + std::string(text) + "'");
}

void ModelDims::validate() const {
  auto positive = [](std::size_t v, const char* what) {
    if (v == 0) throw ValueError(std::string("model dimension '") + what + "' must be positive");
  };
  positive(embed_dim, "embed_dim");
  positive(encoder_width, "encoder_width");
  positive(decoder_width, "decoder_width");
  positive(align_width, "align_width");
  positive(decoder_layers, "decoder_layers");
  positive(height, "height");
  positive(width, "width");
  if (vocab_size < 4) throw ValueError("vocabulary must hold at least the 4 special tokens");
  if (levels < 2) throw ValueError("quantization levels must be at least 2");
}

namespace {

// Fan-in used for the initialization scale of each tensor.
struct Spec {
  std::string name;
  Shape shape;
  std::size_t fan_in;
};

std::vector<Spec> layout_specs(const ModelDims& d, ParamLayout& layout) {
  std::vector<Spec> specs;
  auto push = [&](std::string name, Shape shape, std::size_t fan_in) {
    specs.push_back({std::move(name), std::move(shape), fan_in});
    return specs.size() - 1;
  };
  auto lstm = [&](const std::string& prefix, std::size_t input, std::size_t width) {
    const std::size_t fan = input + width;
    LstmIndices idx;
    idx.w_is = push(prefix + ".w_is", {4 * width, input}, fan);
    idx.w_ss = push(prefix + ".w_ss", {4 * width, width}, fan);
    idx.bias = push(prefix + ".bias", {4 * width}, fan);
    return idx;
  };
  const std::size_t ann = d.annotation_width();
  layout.word_embedding = push("word_embedding", {d.vocab_size, d.embed_dim}, d.embed_dim);
  layout.encoder_forward = lstm("encoder.forward", d.embed_dim, d.encoder_width);
  layout.encoder_backward = lstm("encoder.backward", d.embed_dim, d.encoder_width);
  layout.pixel_embedding = push("pixel_embedding", {d.levels + 1, d.embed_dim}, d.embed_dim);
  layout.decoder.clear();
  for (std::size_t l = 0; l < d.decoder_layers; ++l) {
    const std::size_t input = l == 0 ? d.embed_dim + ann : d.decoder_width;
    layout.decoder.push_back(lstm("decoder." + std::to_string(l), input, d.decoder_width));
  }
  if (d.attention == AttentionKind::additive) {
    const std::size_t fan = d.decoder_width + ann;
    layout.align_pix = push("align.w_pix", {d.align_width, d.decoder_width}, fan);
    layout.align_lang = push("align.w_lang", {ann, d.align_width}, fan);
    layout.align_bias = push("align.bias", {d.align_width}, fan);
    layout.align_v = push("align.v", {d.align_width}, d.align_width);
  } else {
    layout.align_general = push("align.w_general", {ann, d.decoder_width}, d.decoder_width);
  }
  layout.out_w = push("output.w", {d.levels, d.decoder_width + ann}, d.decoder_width + ann);
  layout.out_b = push("output.b", {d.levels}, d.decoder_width + ann);
  return specs;
}

}  // namespace

ModelParams zero_model(const ModelDims& dims) {
  dims.validate();
  ModelParams p;
  p.dims = dims;
  for (auto& s : layout_specs(dims, p.layout)) p.tensors.add(s.name, Tensor(s.shape));
  return p;
}

ModelParams init_model(const ModelDims& dims, std::uint64_t seed) {
  dims.validate();
  ModelParams p;
  p.dims = dims;
  Rng rng(seed);
  for (auto& s : layout_specs(dims, p.layout)) {
    Tensor t(s.shape);
    const double bound = 1.0 / std::sqrt(static_cast<double>(s.fan_in));
    for (auto& v : t.data()) v = rng.uniform(-bound, bound);
    p.tensors.add(s.name, std::move(t));
  }
  return p;
}

ModelParams assemble_model(const ModelDims& dims, ParamSet tensors) {
  dims.validate();
  ModelParams p;
  p.dims = dims;
  const auto specs = layout_specs(dims, p.layout);
  if (specs.size() != tensors.size()) {
    throw FormatError("parameter count " + std::to_string(tensors.size()) +
                      " does not match model layout (" + std::to_string(specs.size()) + ")");
  }
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (tensors.name(i) != specs[i].name || tensors[i].shape() != specs[i].shape) {
      throw FormatError("parameter '" + tensors.name(i) + "' " +
                        shape_to_string(tensors[i].shape()) + " does not match expected '" +
                        specs[i].name + "' " + shape_to_string(specs[i].shape));
    }
  }
  p.tensors = std::move(tensors);
  return p;
}

std::vector<Var> bind_params(Tape& tape, const ParamSet& params, bool requires_grad) {
  std::vector<Var> vars;
  vars.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) vars.push_back(tape.leaf(params[i], requires_grad));
  return vars;
}

BoundModel bind_model(Tape& tape, const ModelParams& params, bool requires_grad) {
  return BoundModel{&params, bind_params(tape, params.tensors, requires_grad)};
}

ParamSet collect_gradients(const Tape& tape, const std::vector<Var>& vars, const ParamSet& like) {
  ParamSet out = like.zeros_like();
  for (std::size_t i = 0; i < vars.size(); ++i) {
    auto g = tape.grad(vars[i]);
    if (!g.empty()) std::copy(g.begin(), g.end(), out[i].data().begin());
  }
  return out;
}

}  // namespace textpix
