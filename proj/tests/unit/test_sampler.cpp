#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "textpix/error.hpp"
#include "textpix/sampler.hpp"

using namespace textpix;

TEST(Stochastic, UniformModelFrequencies) {
  for (std::size_t q : {2u, 4u, 16u}) {
    auto dims = fixture::tiny_dims(q, 10, 10);
    const ModelParams p = zero_model(dims);
    std::vector<std::size_t> counts(q, 0);
    std::size_t total = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      ImageGrid img = sample_stochastic(Caption{{4, 5}}, p, derive_seed(1234, seed));
      for (Level v : img.pixels()) ++counts[v], ++total;
    }
    ASSERT_EQ(total, 10000u);
    const double expect = 1.0 / static_cast<double>(q);
    const double sigma = std::sqrt(total * expect * (1 - expect));
    for (std::size_t k = 0; k < q; ++k) {
      const double f = static_cast<double>(counts[k]) / total;
      EXPECT_NEAR(f, expect, 0.02) << "level " << k;
      EXPECT_LE(std::fabs(counts[k] - total * expect), 3 * sigma) << "level " << k;
    }
  }
}

TEST(Stochastic, SameSeedSameImage) {
  auto dims = fixture::tiny_dims(4, 3, 3);
  auto p = fixture::random_model(dims, 1);
  const Caption c{{4, 6, 7}};
  EXPECT_EQ(sample_stochastic(c, p, 9), sample_stochastic(c, p, 9));
  bool differs = false;
  for (std::uint64_t s = 10; s < 20 && !differs; ++s) differs = sample_stochastic(c, p, s) != sample_stochastic(c, p, 9);
  EXPECT_TRUE(differs);
}

TEST(Stochastic, TraceRowsAreDistributions) {
  auto dims = fixture::tiny_dims(4, 3, 3);
  auto p = fixture::random_model(dims, 2);
  AttentionTrace trace;
  sample_stochastic(Caption{{4, 5, 6}}, p, 3, &trace);
  ASSERT_EQ(trace.rows.size(), 9u);
  for (const auto& row : trace.rows) {
    ASSERT_EQ(row.size(), 3u);
    double s = 0;
    for (double w : row) s += w;
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(Greedy, ZeroModelPicksLevelZero) {
  auto dims = fixture::tiny_dims(16, 4, 4);
  const ImageGrid img = sample_greedy(Caption{{4}}, zero_model(dims));
  for (Level v : img.pixels()) EXPECT_EQ(v, 0);
}

TEST(Beam, WidthOneIsGreedy) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    auto dims = fixture::tiny_dims(2 + rng.below(6), 3, 3);
    auto p = fixture::random_model(dims, 100 + trial, 1.5);
    Caption c = fixture::random_caption(dims, rng);
    EXPECT_EQ(sample_beam(c, p, 1), sample_greedy(c, p));
  }
}

TEST(Beam, RejectsZeroWidth) {
  auto dims = fixture::tiny_dims();
  EXPECT_THROW(sample_beam(Caption{{4}}, zero_model(dims), 0), ValueError);
}

namespace {

// Best image by exhaustive enumeration; ties go to the lexicographically smaller sequence.
std::pair<ImageGrid, double> brute_force(const Caption& c, const ModelParams& p) {
  const auto& d = p.dims;
  std::size_t count = 1;
  for (std::size_t j = 0; j < d.pixels(); ++j) count *= d.levels;
  ImageGrid best;
  double best_ll = -INFINITY;
  for (std::size_t code = 0; code < count; ++code) {
    std::vector<Level> px(d.pixels());
    std::size_t rest = code;
    for (std::size_t j = d.pixels(); j-- > 0;) {
      px[j] = static_cast<Level>(rest % d.levels);
      rest /= d.levels;
    }
    ImageGrid img(d.height, d.width, d.levels, px);
    const double ll = log_likelihood(img, c, p);
    if (ll > best_ll) best_ll = ll, best = img;
  }
  return {best, best_ll};
}

}  // namespace

TEST(Beam, FullWidthFindsTheExactOptimum) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    auto dims = fixture::tiny_dims(2, 2, 2);
    auto p = fixture::random_model(dims, 200 + trial, 2.0);
    Caption c = fixture::random_caption(dims, rng);
    auto [best, ll] = brute_force(c, p);
    BeamResult r = beam_search(c, p, 16);
    EXPECT_EQ(r.image, best);
    EXPECT_NEAR(r.log_prob, ll, 1e-12);
  }
}

TEST(Beam, DominatesGreedyAndGrowsWithWidth) {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    auto dims = fixture::tiny_dims(3, 2, 3);
    auto p = fixture::random_model(dims, 300 + trial, 2.0);
    Caption c = fixture::random_caption(dims, rng);
    const double greedy = log_likelihood(sample_greedy(c, p), c, p);
    double prev = -INFINITY;
    for (std::size_t w : {1u, 2u, 4u, 8u, 27u, 729u}) {
      BeamResult r = beam_search(c, p, w);
      EXPECT_GE(r.log_prob, greedy - 1e-12) << w;
      EXPECT_GE(r.log_prob, prev - 1e-12) << w;
      EXPECT_NEAR(log_likelihood(r.image, c, p), r.log_prob, 1e-12);
      prev = r.log_prob;
    }
    EXPECT_NEAR(prev, brute_force(c, p).second, 1e-12);
  }
}
