#include <benchmark/benchmark.h>

#include <vector>

#include "textpix/decoder.hpp"
#include "textpix/evaluation.hpp"
#include "textpix/optim.hpp"
#include "textpix/params.hpp"
#include "textpix/rng.hpp"
#include "textpix/sampler.hpp"
#include "textpix/ssim.hpp"
#include "textpix/trainer.hpp"

using namespace textpix;

namespace {

// desk-sized model and one caption-image pair
struct Desk {
  ModelDims dims;
  ModelParams params;
  TrainingPair pair;

  Desk() {
    dims.vocab_size = 24;
    params = init_model(dims, 1);
    Rng rng(2);
    std::vector<Level> px(dims.pixels());
    for (auto& p : px) p = static_cast<Level>(rng.below(dims.levels));
    pair.image = ImageGrid(dims.height, dims.width, dims.levels, px);
    pair.caption.ids = {4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14};
  }
};

const Desk& desk() {
  static const Desk d;
  return d;
}

void BM_DecoderStep(benchmark::State& state) {
  const Desk& d = desk();
  const StepwiseDecoder dec(d.params, d.pair.caption);
  const auto init = dec.initial();
  for (auto _ : state) benchmark::DoNotOptimize(dec.step(3, init));
}
BENCHMARK(BM_DecoderStep);

void BM_LogLikelihood(benchmark::State& state) {
  const Desk& d = desk();
  for (auto _ : state) benchmark::DoNotOptimize(log_likelihood(d.pair.image, d.pair.caption, d.params));
}
BENCHMARK(BM_LogLikelihood)->Unit(benchmark::kMillisecond);

void BM_ItemGradient(benchmark::State& state) {
  const Desk& d = desk();
  for (auto _ : state) benchmark::DoNotOptimize(item_gradient(d.pair, d.params));
}
BENCHMARK(BM_ItemGradient)->Unit(benchmark::kMillisecond);

void BM_RmsPropUpdate(benchmark::State& state) {
  ModelParams p = desk().params;
  const ParamSet grads = item_gradient(desk().pair, p).grads;
  OptState opt = make_opt_state(p.tensors);
  for (auto _ : state) rmsprop_update(p.tensors, grads, opt, RmsPropOptions{});
}
BENCHMARK(BM_RmsPropUpdate);

void BM_GreedySample(benchmark::State& state) {
  const Desk& d = desk();
  for (auto _ : state) benchmark::DoNotOptimize(sample_greedy(d.pair.caption, d.params));
}
BENCHMARK(BM_GreedySample)->Unit(benchmark::kMillisecond);

void BM_Ssim(benchmark::State& state) {
  const std::size_t side = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  std::vector<Level> a(side * side), b(side * side);
  for (auto& v : a) v = static_cast<Level>(rng.below(256));
  for (auto& v : b) v = static_cast<Level>(rng.below(256));
  const ImageGrid x(side, side, 256, a), y(side, side, 256, b);
  for (auto _ : state) benchmark::DoNotOptimize(ssim(x, y));
}
BENCHMARK(BM_Ssim)->Arg(12)->Arg(60);

}  // namespace

BENCHMARK_MAIN();
