#include "textpix/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "textpix/decoder.hpp"
#include "textpix/error.hpp"
#include "textpix/rng.hpp"
#include "textpix/sampler.hpp"

namespace textpix {

std::uint64_t caption_sample_seed(std::uint64_t seed, const Caption& caption, std::size_t sample) {
  std::uint64_t h = derive_seed(seed, "caption");
  for (TokenId id : caption.ids) h = derive_seed(h, static_cast<std::uint64_t>(id));
  return derive_seed(h, static_cast<std::uint64_t>(sample));
}

SsiStats mean_ssi(std::span<const Caption> captions, std::span<const ImageGrid> ground_truth,
                  const ModelParams& params, std::size_t samples_per_caption, std::uint64_t seed,
                  const std::optional<SsimParams>& ssim_params) {
  if (captions.size() != ground_truth.size()) throw ValueError("mean_ssi: captions and images are not aligned");
  if (captions.empty()) throw ValueError("mean_ssi: no captions");
  if (samples_per_caption < 1) throw ValueError("mean_ssi: samples_per_caption must be at least 1");
  const SsimParams sp = ssim_params.value_or(SsimParams::for_levels(params.dims.levels));

  SsiStats stats;
  std::vector<double> all;
  all.reserve(captions.size() * samples_per_caption);
  for (std::size_t i = 0; i < captions.size(); ++i) {
    double total = 0.0;
    for (std::size_t k = 0; k < samples_per_caption; ++k) {
      const ImageGrid sample = sample_stochastic(captions[i], params, caption_sample_seed(seed, captions[i], k));
      const double s = ssim(sample, ground_truth[i], sp);
      all.push_back(s);
      total += s;
    }
    stats.per_caption_mean.push_back(total / static_cast<double>(samples_per_caption));
  }
  const double n = static_cast<double>(all.size());
  stats.mean = std::accumulate(all.begin(), all.end(), 0.0) / n;
  double var = 0.0;
  for (double s : all) var += (s - stats.mean) * (s - stats.mean);
  stats.stddev = std::sqrt(var / n);
  return stats;
}

std::optional<double> RankingReport::at(std::size_t k) const {
  for (std::size_t i = 0; i < ks.size(); ++i)
    if (ks[i] == k) return recall[i];
  return std::nullopt;
}

std::vector<std::vector<double>> score_matrix(std::span<const Caption> captions,
                                              std::span<const ImageGrid> images,
                                              const ModelParams& params) {
  std::vector<std::vector<double>> scores(captions.size(), std::vector<double>(images.size()));
  for (std::size_t i = 0; i < captions.size(); ++i)
    for (std::size_t k = 0; k < images.size(); ++k) scores[i][k] = log_likelihood(images[k], captions[i], params);
  return scores;
}

RankingReport rank_from_scores(const std::vector<std::vector<double>>& scores,
                               std::span<const std::size_t> ks) {
  const std::size_t m = scores.size();
  if (m == 0) throw ValueError("recall_at_k: empty pool");
  if (ks.empty()) throw ValueError("recall_at_k: no cut-offs requested");
  for (std::size_t k : ks) {
    if (k < 1) throw ValueError("recall_at_k: cut-offs must be positive");
    if (k > m) {
      throw ValueError("recall_at_k: pool of " + std::to_string(m) + " images is smaller than K = " +
                       std::to_string(k));
    }
  }
  RankingReport report;
  report.ks.assign(ks.begin(), ks.end());
  for (std::size_t i = 0; i < m; ++i) {
    if (scores[i].size() != m) throw ValueError("recall_at_k: score matrix is not square");
    const double own = scores[i][i];
    std::size_t rank = 1;
    for (std::size_t k = 0; k < m; ++k) {
      if (k == i) continue;
      if (scores[i][k] > own || (scores[i][k] == own && k < i)) ++rank;
    }
    report.ranks.push_back(rank);
  }
  for (std::size_t k : ks) {
    const auto hits = std::count_if(report.ranks.begin(), report.ranks.end(), [&](std::size_t r) { return r <= k; });
    report.recall.push_back(static_cast<double>(hits) / static_cast<double>(m));
  }
  return report;
}

RankingReport recall_at_k(std::span<const Caption> captions, std::span<const ImageGrid> images,
                          const ModelParams& params, std::span<const std::size_t> ks) {
  if (captions.size() != images.size()) throw ValueError("recall_at_k: captions and images are not aligned");
  const std::size_t max_k = ks.empty() ? 0 : *std::max_element(ks.begin(), ks.end());
  if (max_k > images.size()) {
    throw ValueError("recall_at_k: pool of " + std::to_string(images.size()) +
                     " images is smaller than K = " + std::to_string(max_k));
  }
  return rank_from_scores(score_matrix(captions, images, params), ks);
}

std::string format_metrics_table(const std::string& model_name, const RankingReport& ranking,
                                 const std::optional<SsiStats>& ssi) {
  std::ostringstream os;
  char buf[64];
  const std::size_t name_width = std::max<std::size_t>(model_name.size(), 5) + 2;
  auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s.append(w - s.size(), ' ');
    return s;
  };
  os << pad("Model", name_width);
  for (std::size_t k : ranking.ks) os << pad("R@" + std::to_string(k), 8);
  os << "Image Similarity (SSI)\n";
  os << pad(model_name, name_width);
  for (double r : ranking.recall) {
    std::snprintf(buf, sizeof buf, "%.1f", 100.0 * r);
    os << pad(buf, 8);
  }
  if (ssi) {
    std::snprintf(buf, sizeof buf, "%.3f +- %.2f", ssi->mean, ssi->stddev);
    os << buf;
  } else {
    os << "-";
  }
  os << '\n';
  return os.str();
}

}  // namespace textpix
