#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "textpix/image.hpp"
#include "textpix/params.hpp"
#include "textpix/ssim.hpp"
#include "textpix/vocab.hpp"

namespace textpix {

// Default number of stochastic samples drawn per caption for the SSI statistic.
inline constexpr std::size_t kDefaultSamplesPerCaption = 50;

struct SsiStats {
  double mean = 0.0;
  double stddev = 0.0;                   // population std over every individual sample
  std::vector<double> per_caption_mean;  // aligned with the input captions
};

// Seed used for sample k of a caption: derived from the run seed and the caption's token
// ids, so identical captions draw identical samples wherever they appear in the list.
std::uint64_t caption_sample_seed(std::uint64_t seed, const Caption& caption, std::size_t sample);

SsiStats mean_ssi(std::span<const Caption> captions, std::span<const ImageGrid> ground_truth,
                  const ModelParams& params, std::size_t samples_per_caption, std::uint64_t seed,
                  const std::optional<SsimParams>& ssim_params = std::nullopt);

struct RankingReport {
  std::vector<std::size_t> ranks;  // 1-based rank of image i under caption i
  std::vector<std::size_t> ks;
  std::vector<double> recall;      // recall[k] = fraction of ranks <= ks[k]

  std::optional<double> at(std::size_t k) const;
};

// scores[i][k] = log p(image k | caption i)
std::vector<std::vector<double>> score_matrix(std::span<const Caption> captions,
                                              std::span<const ImageGrid> images,
                                              const ModelParams& params);

// Sorts the pool by descending score, ties by ascending image index.
RankingReport rank_from_scores(const std::vector<std::vector<double>>& scores,
                               std::span<const std::size_t> ks);

RankingReport recall_at_k(std::span<const Caption> captions, std::span<const ImageGrid> images,
                          const ModelParams& params, std::span<const std::size_t> ks);

// Text table: Model | R@k ... | SSI, recall in percent.
std::string format_metrics_table(const std::string& model_name, const RankingReport& ranking,
                                 const std::optional<SsiStats>& ssi);

}  // namespace textpix
