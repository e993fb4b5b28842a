#pragma once

#include <cstdint>
#include <vector>

#include "textpix/decoder.hpp"
#include "textpix/params.hpp"
#include "textpix/rng.hpp"

namespace fixture {

inline textpix::ModelDims tiny_dims(std::size_t levels = 2, std::size_t h = 2, std::size_t w = 2,
                                    textpix::AttentionKind kind = textpix::AttentionKind::additive) {
  textpix::ModelDims d;
  d.vocab_size = 8;
  d.embed_dim = 3;
  d.encoder_width = 2;
  d.decoder_width = 4;
  d.align_width = 3;
  d.decoder_layers = 1;
  d.levels = levels;
  d.height = h;
  d.width = w;
  d.attention = kind;
  return d;
}

// Every entry uniform in [-scale, scale]; larger than the training init so that tests see
// non-trivial distributions.
inline textpix::ModelParams random_model(const textpix::ModelDims& dims, std::uint64_t seed, double scale = 1.0) {
  textpix::ModelParams p = textpix::zero_model(dims);
  textpix::Rng rng(seed);
  for (std::size_t t = 0; t < p.tensors.size(); ++t)
    for (auto& v : p.tensors[t].data()) v = rng.uniform(-scale, scale);
  return p;
}

inline textpix::ImageGrid random_image(const textpix::ModelDims& dims, textpix::Rng& rng) {
  std::vector<textpix::Level> px(dims.pixels());
  for (auto& v : px) v = static_cast<textpix::Level>(rng.below(dims.levels));
  return textpix::ImageGrid(dims.height, dims.width, dims.levels, std::move(px));
}

inline textpix::Caption random_caption(const textpix::ModelDims& dims, textpix::Rng& rng, std::size_t max_len = 4) {
  textpix::Caption c;
  const std::size_t n = 1 + rng.below(max_len);
  for (std::size_t i = 0; i < n; ++i) c.ids.push_back(static_cast<textpix::TokenId>(rng.below(dims.vocab_size)));
  return c;
}

}  // namespace fixture
