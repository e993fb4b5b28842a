#include "textpix/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "textpix/decoder.hpp"
#include "textpix/error.hpp"
#include "textpix/rng.hpp"

namespace textpix {

namespace {

std::size_t argmax_lowest(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

std::size_t draw(const std::vector<double>& log_probs, Rng& rng) {
  const double u = rng.uniform();
  double cumulative = 0.0;
  for (std::size_t i = 0; i < log_probs.size(); ++i) {
    cumulative += std::exp(log_probs[i]);
    if (u < cumulative) return i;
  }
  // Rounding left the total slightly under 1; fall back to the last level with mass.
  for (std::size_t i = log_probs.size(); i-- > 0;)
    if (std::exp(log_probs[i]) > 0.0) return i;
  return log_probs.size() - 1;
}

template <typename Choose>
ImageGrid generate(const Caption& caption, const ModelParams& params, AttentionTrace* trace,
                   Choose choose) {
  const auto& d = params.dims;
  const StepwiseDecoder decoder(params, caption);
  ImageGrid image(d.height, d.width, d.levels);
  auto state = decoder.initial();
  int prev = kBosPixel;
  if (trace) trace->rows.clear();
  for (std::size_t j = 0; j < image.size(); ++j) {
    auto step = decoder.step(prev, state);
    const std::size_t level = choose(step.log_probs);
    image.set(j, static_cast<Level>(level));
    if (trace) trace->rows.push_back(std::move(step.attention));
    state = std::move(step.state);
    prev = static_cast<int>(level);
  }
  return image;
}

}  // namespace

ImageGrid sample_stochastic(const Caption& caption, const ModelParams& params, std::uint64_t seed,
                            AttentionTrace* trace) {
  Rng rng(seed);
  return generate(caption, params, trace, [&](const std::vector<double>& lp) { return draw(lp, rng); });
}

ImageGrid sample_greedy(const Caption& caption, const ModelParams& params, AttentionTrace* trace) {
  return generate(caption, params, trace, [](const std::vector<double>& lp) { return argmax_lowest(lp); });
}

BeamResult beam_search(const Caption& caption, const ModelParams& params, std::size_t width) {
  if (width < 1) throw ValueError("beam width must be at least 1");
  const auto& d = params.dims;
  const StepwiseDecoder decoder(params, caption);

  struct Beam {
    std::vector<Level> pixels;
    double score = 0.0;
    StepwiseDecoder::State state;
  };
  struct Candidate {
    std::size_t beam;
    Level level;
    double score;
  };
  auto better = [](const std::vector<Level>& pa, double sa, const std::vector<Level>& pb, double sb) {
    if (sa != sb) return sa > sb;
    return pa < pb;
  };

  std::vector<Beam> beams(1);
  beams[0].state = decoder.initial();
  const std::size_t length = d.pixels();
  for (std::size_t j = 0; j < length; ++j) {
    std::vector<StepwiseDecoder::Step> steps;
    steps.reserve(beams.size());
    std::vector<Candidate> candidates;
    candidates.reserve(beams.size() * d.levels);
    for (std::size_t b = 0; b < beams.size(); ++b) {
      const int prev = j == 0 ? kBosPixel : static_cast<int>(beams[b].pixels.back());
      steps.push_back(decoder.step(prev, beams[b].state));
      const auto& lp = steps.back().log_probs;
      for (std::size_t q = 0; q < lp.size(); ++q)
        candidates.push_back({b, static_cast<Level>(q), j == 0 ? lp[q] : beams[b].score + lp[q]});
    }
    // Prefixes all have length j, so (prefix, level) order is the lexicographic order of
    // the extended sequences.
    auto order = [&](const Candidate& x, const Candidate& y) {
      if (x.score != y.score) return x.score > y.score;
      if (x.beam != y.beam) return beams[x.beam].pixels < beams[y.beam].pixels;
      return x.level < y.level;
    };
    const std::size_t keep = std::min(width, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                      candidates.end(), order);
    std::vector<Beam> next;
    next.reserve(keep);
    for (std::size_t k = 0; k < keep; ++k) {
      const Candidate& cand = candidates[k];
      Beam nb;
      nb.pixels = beams[cand.beam].pixels;
      nb.pixels.push_back(cand.level);
      nb.score = cand.score;
      nb.state = steps[cand.beam].state;
      next.push_back(std::move(nb));
    }
    beams = std::move(next);
  }

  std::size_t best = 0;
  for (std::size_t b = 1; b < beams.size(); ++b)
    if (better(beams[b].pixels, beams[b].score, beams[best].pixels, beams[best].score)) best = b;
  return {ImageGrid(d.height, d.width, d.levels, beams[best].pixels), beams[best].score};
}

ImageGrid sample_beam(const Caption& caption, const ModelParams& params, std::size_t width,
                      AttentionTrace* trace) {
  BeamResult r = beam_search(caption, params, width);
  if (trace) {
    // Replay the winning sequence to record its attention weights.
    const StepwiseDecoder decoder(params, caption);
    auto state = decoder.initial();
    trace->rows.clear();
    int prev = kBosPixel;
    for (Level p : r.image.pixels()) {
      auto step = decoder.step(prev, state);
      trace->rows.push_back(std::move(step.attention));
      state = std::move(step.state);
      prev = p;
    }
  }
  return r.image;
}

}  // namespace textpix
