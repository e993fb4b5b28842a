#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "textpix/image.hpp"
#include "textpix/params.hpp"
#include "textpix/vocab.hpp"

namespace textpix {

// Attention weights recorded while generating: row j holds the N weights used for pixel j.
struct AttentionTrace {
  std::vector<std::vector<double>> rows;
};

// Draws each pixel from its categorical distribution (inverse CDF on a seeded uniform).
ImageGrid sample_stochastic(const Caption& caption, const ModelParams& params, std::uint64_t seed,
                            AttentionTrace* trace = nullptr);

// Most probable level at each step; ties go to the lowest level.
ImageGrid sample_greedy(const Caption& caption, const ModelParams& params,
                        AttentionTrace* trace = nullptr);

struct BeamResult {
  ImageGrid image;
  double log_prob = 0.0;  // cumulative score of the returned sequence
};

// Keeps the `width` best prefixes by cumulative log-probability after every step; ties go
// to the lexicographically smaller pixel sequence.
BeamResult beam_search(const Caption& caption, const ModelParams& params, std::size_t width);
ImageGrid sample_beam(const Caption& caption, const ModelParams& params, std::size_t width,
                      AttentionTrace* trace = nullptr);

}  // namespace textpix
