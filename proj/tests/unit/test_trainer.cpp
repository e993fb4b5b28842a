#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "textpix/checkpoint.hpp"
#include "textpix/error.hpp"
#include "textpix/optim.hpp"
#include "textpix/trainer.hpp"

using namespace textpix;

namespace {

ParamSet grads_of(std::vector<std::vector<double>> tensors) {
  ParamSet g;
  for (std::size_t i = 0; i < tensors.size(); ++i) g.add("t" + std::to_string(i), Tensor::vector(tensors[i]));
  return g;
}

TrainConfig tiny_config(std::size_t epochs = 3) {
  TrainConfig c;
  c.dims = fixture::tiny_dims(4, 3, 3);
  c.epochs = epochs;
  c.batch_size = 4;
  c.seed = 5;
  return c;
}

std::vector<TrainingPair> tiny_data(const ModelDims& dims, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<TrainingPair> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({fixture::random_image(dims, rng), fixture::random_caption(dims, rng)});
  return out;
}

Vocabulary tiny_vocab() { return Vocabulary({"a", "b", "c", "d"}); }

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("textpix-test-" + std::to_string(::getpid()) + "-" + name);
}

}  // namespace

TEST(Clip, Examples) {
  ParamSet small = grads_of({{0.3, 0.4}});
  EXPECT_DOUBLE_EQ(clip_gradients(small, 1.0), 0.5);
  EXPECT_EQ(small[0].values(), (std::vector<double>{0.3, 0.4}));

  ParamSet five = grads_of({{3, 4}});
  EXPECT_EQ(clip_gradients(five, 1.0), 5.0);
  EXPECT_NEAR(five[0][0], 0.6, 1e-15);
  EXPECT_NEAR(five[0][1], 0.8, 1e-15);

  ParamSet two = grads_of({{1, 0}, {0, 1}});
  clip_gradients(two, 1.0);
  EXPECT_NEAR(two[0][0], 1 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(two[1][1], 0.7071, 1e-4);
}

TEST(Clip, NonFiniteNamesTheTensor) {
  ParamSet g = grads_of({{1, 2}, {0, std::nan("")}});
  try {
    clip_gradients(g, 1.0);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("t1"), std::string::npos) << e.what();
  }
  EXPECT_THROW(clip_gradients(g, 0.0), ValueError);
}

TEST(Clip, NormNeverExceedsThreshold) {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::vector<double>> t(1 + rng.below(4));
    for (auto& v : t) {
      v.resize(1 + rng.below(6));
      for (auto& x : v) x = rng.uniform(-100, 100);
    }
    ParamSet g = grads_of(t);
    const double thr = rng.uniform(0.01, 10);
    clip_gradients(g, thr);
    EXPECT_LE(global_norm(g), thr + 1e-12);
  }
}

TEST(RmsProp, Examples) {
  ParamSet p = grads_of({{0.5, -0.25}});
  OptState opt = make_opt_state(p);
  opt.accumulators[0][0] = 0.4;
  const ParamSet keep = p;
  rmsprop_update(p, grads_of({{0, 0}}), opt);
  EXPECT_EQ(p, keep);
  EXPECT_DOUBLE_EQ(opt.accumulators[0][0], 0.9 * 0.4);

  ParamSet theta = grads_of({{0.0}});
  OptState o = make_opt_state(theta);
  const ParamSet one = grads_of({{1.0}});
  rmsprop_update(theta, one, o);
  EXPECT_DOUBLE_EQ(o.accumulators[0][0], 0.1);
  EXPECT_NEAR(theta[0][0], -0.001 / std::sqrt(0.1 + 1e-8), 1e-18);
  EXPECT_NEAR(theta[0][0], -3.1623e-3, 1e-7);
  const double before = theta[0][0];
  rmsprop_update(theta, one, o);
  EXPECT_NEAR(theta[0][0] - before, -0.001 / std::sqrt(0.19 + 1e-8), 1e-17);
  EXPECT_NEAR(theta[0][0] - before, -2.2942e-3, 1e-7);
  EXPECT_EQ(o.step, 2u);
}

TEST(RmsProp, ShapeMismatchIsRejected) {
  ParamSet p = grads_of({{1, 2}});
  OptState o = make_opt_state(p);
  EXPECT_THROW(rmsprop_update(p, grads_of({{1, 2, 3}}), o), ShapeError);
}

TEST(RmsProp, AccumulatorsStayNonNegative) {
  Rng rng(2);
  ParamSet p = grads_of({{0, 0, 0}});
  OptState o = make_opt_state(p);
  for (int s = 0; s < 100; ++s) {
    rmsprop_update(p, grads_of({{rng.uniform(-5, 5), rng.uniform(-5, 5), 0}}), o);
    for (double a : o.accumulators[0].data()) EXPECT_GE(a, 0.0);
  }
}

TEST(TrainConfig, ValidationAndText) {
  TrainConfig c = tiny_config();
  c.level_weights = {1, 2, 3, 4};
  EXPECT_EQ(train_config_from_text(to_text(c)), c);
  TrainConfig bad = c;
  bad.learning_rate = 0;
  EXPECT_THROW(bad.validate(), ValueError);
  bad = c;
  bad.batch_size = 0;
  EXPECT_THROW(bad.validate(), ValueError);
  bad = c;
  bad.clip_norm = -1;
  EXPECT_THROW(bad.validate(), ValueError);
}

TEST(Train, ZeroEpochs) {
  TrainConfig c = tiny_config(0);
  auto r = train(c, tiny_vocab(), {}, {});
  EXPECT_TRUE(r.history.empty());
  EXPECT_EQ(r.checkpoint.step, 0u);
  EXPECT_EQ(r.checkpoint.params, initial_checkpoint(c, tiny_vocab()).params);
}

TEST(Train, InitialLossIsNearLogQ) {
  TrainConfig c = tiny_config();
  c.dims = ModelDims{};  // desk widths, 12x12, Q = 16
  auto data = tiny_data(c.dims, 4, 3);
  auto ck = initial_checkpoint(c, tiny_vocab());
  const double nll = mean_nll(data, ck.params);
  EXPECT_NEAR(nll / std::log(16.0), 1.0, 0.02);
}

TEST(Train, DeterministicAndThreadIndependent) {
  TrainConfig c = tiny_config(3);
  auto data = tiny_data(c.dims, 6, 4);
  auto eval = tiny_data(c.dims, 2, 5);
  const Vocabulary v = tiny_vocab();
  auto a = train(c, v, data, eval);
  auto b = train(c, v, data, eval);
  c.threads = 3;
  auto t = train(c, v, data, eval);
  ASSERT_EQ(a.history.size(), 3u);
  EXPECT_EQ(a.history, b.history);
  EXPECT_EQ(a.history, t.history);
  EXPECT_EQ(a.checkpoint.params, b.checkpoint.params);
  EXPECT_EQ(a.checkpoint.params, t.checkpoint.params);
  EXPECT_EQ(a.checkpoint.opt.accumulators, t.checkpoint.opt.accumulators);
  EXPECT_EQ(a.checkpoint.step, 3u * 2u);
}

TEST(Train, LossDecreasesOnOneExample) {
  TrainConfig c = tiny_config(60);
  c.learning_rate = 0.01;
  c.batch_size = 1;
  auto data = tiny_data(c.dims, 1, 6);
  auto r = train(c, tiny_vocab(), data, {});
  ASSERT_EQ(r.history.size(), 60u);
  EXPECT_TRUE(std::isnan(r.history[0].eval_nll));
  auto window = [&](std::size_t start) {
    double s = 0;
    for (std::size_t e = start; e < start + 10; ++e) s += r.history[e].train_nll;
    return s / 10;
  };
  for (std::size_t w = 10; w + 10 <= 60; w += 10) EXPECT_LE(window(w), window(w - 10));
  EXPECT_LT(r.history.back().train_nll, 0.5 * r.initial_train_nll);
}

TEST(Train, NonFiniteLossAbortsWithLastGoodState) {
  TrainConfig c = tiny_config(3);
  c.level_weights = {1, 1, std::nan(""), 1};
  auto data = tiny_data(c.dims, 4, 7);
  auto r = train(c, tiny_vocab(), data, {});
  EXPECT_TRUE(r.aborted);
  EXPECT_FALSE(r.abort_reason.empty());
  for (std::size_t t = 0; t < r.checkpoint.params.tensors.size(); ++t)
    EXPECT_TRUE(r.checkpoint.params.tensors[t].all_finite());
}

TEST(Train, PeriodicCheckpoints) {
  TrainConfig c = tiny_config(4);
  c.checkpoint_every = 2;
  std::vector<std::uint64_t> steps;
  TrainHooks hooks;
  hooks.on_checkpoint = [&](const Checkpoint& ck) { steps.push_back(ck.step); };
  train(c, tiny_vocab(), tiny_data(c.dims, 4, 8), {}, hooks);
  EXPECT_EQ(steps, (std::vector<std::uint64_t>{2, 4}));
}

TEST(Train, RejectsMismatchedImages) {
  TrainConfig c = tiny_config(1);
  auto data = tiny_data(fixture::tiny_dims(4, 2, 2), 2, 9);
  EXPECT_THROW(train(c, tiny_vocab(), data, {}), ValueError);
  EXPECT_THROW(train(c, tiny_vocab(), {}, {}), ValueError);
}

TEST(Checkpoint, RoundTripIsExact) {
  TrainConfig c = tiny_config(2);
  auto data = tiny_data(c.dims, 4, 10);
  auto r = train(c, tiny_vocab(), data, {});
  const auto path = temp_file("ck.bin");
  save_checkpoint(r.checkpoint, path.string());
  Checkpoint back = load_checkpoint(path.string());
  EXPECT_EQ(back.params, r.checkpoint.params);
  EXPECT_EQ(back.opt, r.checkpoint.opt);
  EXPECT_EQ(back.config, r.checkpoint.config);
  EXPECT_EQ(back.vocab, r.checkpoint.vocab);
  EXPECT_EQ(back.step, r.checkpoint.step);
  for (const auto& pair : data) {
    EXPECT_EQ(log_likelihood(pair.image, pair.caption, back.params),
              log_likelihood(pair.image, pair.caption, r.checkpoint.params));
  }
  EXPECT_EQ(encode_checkpoint(back), encode_checkpoint(r.checkpoint));
  std::filesystem::remove(path);
}

TEST(Checkpoint, CorruptionIsRejected) {
  TrainConfig c = tiny_config(0);
  auto bytes = encode_checkpoint(initial_checkpoint(c, tiny_vocab()));
  for (std::size_t keep : {std::size_t{0}, std::size_t{4}, bytes.size() / 2, bytes.size() - 1}) {
    std::vector<std::uint8_t> cut(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(keep));
    EXPECT_THROW(decode_checkpoint(cut), FormatError) << keep;
  }
  auto flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x01;
  EXPECT_THROW(decode_checkpoint(flipped), FormatError);
  auto version = bytes;
  version[8] = 99;  // first byte of the version field
  EXPECT_THROW(decode_checkpoint(version), FormatError);
  EXPECT_THROW(load_checkpoint("/nonexistent/ck.bin"), FormatError);
}
