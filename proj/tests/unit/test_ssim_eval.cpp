#include <gtest/gtest.h>

#include <cmath>

#include "brute_ssim.hpp"
#include "fixtures.hpp"
#include "textpix/error.hpp"
#include "textpix/evaluation.hpp"
#include "textpix/ssim.hpp"

using namespace textpix;

namespace {

ImageGrid filled(std::size_t h, std::size_t w, std::size_t q, Level v) {
  return ImageGrid(h, w, q, std::vector<Level>(h * w, v));
}

}  // namespace

TEST(Ssim, Examples) {
  Rng rng(1);
  auto dims = fixture::tiny_dims(16, 5, 7);
  for (int i = 0; i < 20; ++i) {
    ImageGrid a = fixture::random_image(dims, rng);
    EXPECT_EQ(ssim(a, a), 1.0);
  }
  EXPECT_EQ(ssim(filled(4, 4, 16, 0), filled(4, 4, 16, 0)), 1.0);
  const double r = 15.0, c1 = (0.01 * r) * (0.01 * r);
  const double v = ssim(filled(4, 4, 16, 0), filled(4, 4, 16, 15));
  EXPECT_NEAR(v, c1 / (r * r + c1), 1e-15);
  EXPECT_NEAR(v, 9.999e-5, 1e-8);
}

TEST(Ssim, ConstantsFollowTheRange) {
  SsimParams p = SsimParams::for_levels(256);
  EXPECT_DOUBLE_EQ(p.range, 255.0);
  EXPECT_DOUBLE_EQ(p.c1, (0.01 * 255) * (0.01 * 255));
  EXPECT_DOUBLE_EQ(p.c2, (0.03 * 255) * (0.03 * 255));
  SsimParams bad = p;
  bad.c1 = 0;
  EXPECT_THROW(bad.validate(), ValueError);
}

TEST(Ssim, ShapeMismatchIsRejected) {
  EXPECT_THROW(ssim(filled(2, 3, 4, 0), filled(3, 2, 4, 0)), ShapeError);
}

TEST(Ssim, MatchesBruteForceSymmetricAndBounded) {
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    auto dims = fixture::tiny_dims(2 + rng.below(255), 1 + rng.below(12), 1 + rng.below(12));
    ImageGrid a = fixture::random_image(dims, rng);
    ImageGrid b = fixture::random_image(dims, rng);
    const double s = ssim(a, b);
    EXPECT_NEAR(s, ref::brute_ssim(a, b), 1e-10);
    EXPECT_EQ(s, ssim(b, a));
    EXPECT_LE(std::fabs(s), 1.0);
  }
}

TEST(Ssim, WindowedVariant) {
  Rng rng(3);
  auto dims = fixture::tiny_dims(16, 6, 6);
  ImageGrid a = fixture::random_image(dims, rng), b = fixture::random_image(dims, rng);
  SsimParams p = SsimParams::for_levels(16);
  p.window = 6;
  EXPECT_NEAR(ssim(a, b, p), ssim(a, b), 1e-15);
  p.window = 3;
  EXPECT_EQ(ssim(a, a, p), 1.0);
  EXPECT_EQ(ssim(a, b, p), ssim(b, a, p));
  p.window = 7;
  EXPECT_THROW(ssim(a, b, p), ValueError);
}

TEST(MeanSsi, IdenticalCaptionsGetIdenticalStatistics) {
  auto dims = fixture::tiny_dims(4, 3, 3);
  auto p = fixture::random_model(dims, 4);
  Rng rng(4);
  ImageGrid img = fixture::random_image(dims, rng);
  std::vector<Caption> caps{Caption{{4, 5}}, Caption{{6}}, Caption{{4, 5}}};
  std::vector<ImageGrid> truth{img, fixture::random_image(dims, rng), img};
  SsiStats s = mean_ssi(caps, truth, p, 5, 77);
  ASSERT_EQ(s.per_caption_mean.size(), 3u);
  EXPECT_EQ(s.per_caption_mean[0], s.per_caption_mean[2]);
  EXPECT_GE(s.stddev, 0.0);
  EXPECT_EQ(kDefaultSamplesPerCaption, 50u);
  EXPECT_THROW(mean_ssi(caps, truth, p, 0, 1), ValueError);
  EXPECT_THROW(mean_ssi(caps, std::span(truth).first(2), p, 1, 1), ValueError);
}

TEST(Recall, SingletonPool) {
  auto dims = fixture::tiny_dims(4, 2, 2);
  Rng rng(5);
  std::vector<Caption> caps{Caption{{4}}};
  std::vector<ImageGrid> imgs{fixture::random_image(dims, rng)};
  const std::size_t ks[] = {1};
  auto r = recall_at_k(caps, imgs, fixture::random_model(dims, 5), ks);
  EXPECT_EQ(r.at(1), 1.0);
}

TEST(Recall, UniformModelTiesByIndex) {
  auto dims = fixture::tiny_dims(4, 2, 2);
  Rng rng(6);
  std::vector<Caption> caps;
  std::vector<ImageGrid> imgs;
  for (int i = 0; i < 10; ++i) caps.push_back(fixture::random_caption(dims, rng)), imgs.push_back(fixture::random_image(dims, rng));
  const std::size_t ks[] = {1, 5, 10};
  auto r = recall_at_k(caps, imgs, zero_model(dims), ks);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(r.ranks[i], i + 1);
  EXPECT_DOUBLE_EQ(*r.at(1), 0.1);
  EXPECT_DOUBLE_EQ(*r.at(5), 0.5);
  EXPECT_DOUBLE_EQ(*r.at(10), 1.0);
  EXPECT_FALSE(r.at(50).has_value());
}

TEST(Recall, PoolSmallerThanKIsRejected) {
  auto dims = fixture::tiny_dims(4, 2, 2);
  Rng rng(7);
  std::vector<Caption> caps{Caption{{4}}, Caption{{5}}};
  std::vector<ImageGrid> imgs{fixture::random_image(dims, rng), fixture::random_image(dims, rng)};
  const std::size_t ks[] = {1, 5};
  EXPECT_THROW(recall_at_k(caps, imgs, zero_model(dims), ks), ValueError);
}

TEST(Recall, MonotoneInKOnRandomScores) {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = 1 + rng.below(60);
    std::vector<std::vector<double>> s(m, std::vector<double>(m));
    for (auto& row : s)
      for (auto& v : row) v = static_cast<double>(rng.below(5));  // plenty of ties
    std::vector<std::size_t> ks;
    for (std::size_t k = 1; k <= m; k += 1 + rng.below(4)) ks.push_back(k);
    auto r = rank_from_scores(s, ks);
    for (std::size_t i = 0; i < m; ++i) {
      // rank = 1 + strictly better images + tied images with a smaller index
      std::size_t expect = 1;
      for (std::size_t k = 0; k < m; ++k) expect += s[i][k] > s[i][i] || (s[i][k] == s[i][i] && k < i);
      EXPECT_EQ(r.ranks[i], expect);
    }
    for (std::size_t j = 0; j < ks.size(); ++j) {
      EXPECT_GE(r.recall[j], 0.0);
      EXPECT_LE(r.recall[j], 1.0);
      if (j > 0) EXPECT_LE(r.recall[j - 1], r.recall[j]);
    }
  }
}

TEST(MetricsTable, ColumnOrder) {
  RankingReport r;
  r.ks = {1, 5, 10, 50};
  r.recall = {0.043, 0.536, 0.631, 0.88};
  SsiStats s;
  s.mean = 0.356;
  s.stddev = 0.35;
  const std::string t = format_metrics_table("alignPixelRNN", r, s);
  const auto p1 = t.find("R@1"), p5 = t.find("R@5"), p10 = t.find("R@10"), p50 = t.find("R@50"), ps = t.find("SSI");
  ASSERT_NE(p1, std::string::npos);
  EXPECT_LT(p1, p5);
  EXPECT_LT(p5, p10);
  EXPECT_LT(p10, p50);
  EXPECT_LT(p50, ps);
  EXPECT_NE(t.find("alignPixelRNN"), std::string::npos);
  EXPECT_NE(t.find("53.6"), std::string::npos);
  EXPECT_NE(t.find("0.356"), std::string::npos);
}
